// Wasserstein adversarial training over encoded walks.
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "gridforge/uggan/critic.hpp"
#include "gridforge/uggan/generator.hpp"
#include "gridforge/walks/encoding.hpp"

namespace gridforge::uggan {

struct TrainConfig {
  int iterations = 3000;
  int critic_steps_per_gen_step = 5;
  double clip_bound = 0.01;       // critic weight clipping radius
  double learning_rate = 1e-3;
  double tau_start = 2.0;         // Gumbel temperature, annealed linearly
  double tau_end = 0.5;
  int batch_size = 64;
  std::uint64_t rng_seed = 1;
  int hidden = 64;
  int noise_dim = 32;
  int embed_dim = 64;
  double z_sigma = 1.0;
  double grad_clip_norm = 5.0;
  double rmsprop_decay = 0.9;
  int checkpoint_every = 50;      // snapshot cadence for failure recovery

  void check() const;
};

struct TrainedModel {
  GeneratorParams gen;
  CriticParams critic;
  int n_nodes = 0;
  int n_channels = 0;
  int walk_length = 0;
  TrainConfig cfg;

  int token_dim() const { return 4 * n_nodes * n_channels; }
};

struct LossRecord {
  int iteration = 0;
  double critic_loss = 0.0;  // E[D(fake)] - E[D(real)], the critic's descent loss
  double gen_loss = 0.0;     // -E[D(fake)]
  double wasserstein() const { return -critic_loss; }
};

struct TrainResult {
  TrainedModel model;
  std::vector<LossRecord> history;
};

// Thrown on non-finite losses; carries the most recent periodic snapshot.
class TrainingError : public SolveError {
public:
  TrainingError(const std::string& msg, std::shared_ptr<TrainedModel> checkpoint,
                int iteration)
      : SolveError(msg), last_checkpoint(std::move(checkpoint)), iteration(iteration) {}
  std::shared_ptr<TrainedModel> last_checkpoint;
  int iteration;
};

// Alternating updates: `critic_steps_per_gen_step` clipped critic ascent
// steps per generator descent step. Single-threaded and bit-reproducible for
// a fixed seed.
TrainResult train(const std::vector<walks::WalkTensor>& corpus, const TrainConfig& cfg);

// Checkpoint serialization (versioned JSON of weight arrays + config).
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

// Loss trajectory CSV: iteration,critic_loss,gen_loss.
void save_loss_history(const std::vector<LossRecord>& history,
                       const std::filesystem::path& path);
std::vector<LossRecord> load_loss_history(const std::filesystem::path& path);

}  // namespace gridforge::uggan
