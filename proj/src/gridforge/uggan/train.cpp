#include "gridforge/uggan/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "gridforge/common/io_util.hpp"

namespace gridforge::uggan {

using nlohmann::json;

void TrainConfig::check() const {
  if (iterations < 1) throw ConfigError("train: iterations must be >= 1");
  if (critic_steps_per_gen_step < 1) throw ConfigError("train: critic steps must be >= 1");
  if (clip_bound <= 0.0) throw ConfigError("train: clip_bound must be > 0");
  if (!(tau_start >= tau_end && tau_end > 0.0))
    throw ConfigError("train: temperature schedule requires tau_start >= tau_end > 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
}

namespace {

// RMSProp with a global gradient-norm clip applied before the update.
template <typename M>
struct RmsState {
  M sq;
  explicit RmsState(const M& like) : sq(M::Zero(like.rows(), like.cols())) {}
  void apply(M& param, const M& grad, double lr, double decay) {
    sq = decay * sq + (1.0 - decay) * grad.cwiseProduct(grad);
    param.array() -= lr * grad.array() / (sq.array().sqrt() + 1e-8);
  }
};

struct GenOpt {
  RmsState<Mat> w_init, w_x, w_h, w_proj;
  RmsState<Vec> b_init, b, b_proj;
  explicit GenOpt(const GeneratorParams& p)
      : w_init(p.w_init), w_x(p.cell.w_x), w_h(p.cell.w_h), w_proj(p.w_proj),
        b_init(p.b_init), b(p.cell.b), b_proj(p.b_proj) {}
  void step(GeneratorParams& p, GeneratorGrads& g, const TrainConfig& cfg) {
    const double norm = std::sqrt(g.squared_norm());
    if (norm > cfg.grad_clip_norm) g.scale(cfg.grad_clip_norm / norm);
    w_init.apply(p.w_init, g.w_init, cfg.learning_rate, cfg.rmsprop_decay);
    b_init.apply(p.b_init, g.b_init, cfg.learning_rate, cfg.rmsprop_decay);
    w_x.apply(p.cell.w_x, g.cell.w_x, cfg.learning_rate, cfg.rmsprop_decay);
    w_h.apply(p.cell.w_h, g.cell.w_h, cfg.learning_rate, cfg.rmsprop_decay);
    b.apply(p.cell.b, g.cell.b, cfg.learning_rate, cfg.rmsprop_decay);
    w_proj.apply(p.w_proj, g.w_proj, cfg.learning_rate, cfg.rmsprop_decay);
    b_proj.apply(p.b_proj, g.b_proj, cfg.learning_rate, cfg.rmsprop_decay);
  }
};

struct CriticOpt {
  RmsState<Mat> w_embed, w_x, w_h;
  RmsState<Vec> b_embed, b, w_out;
  double sq_b_out = 0.0;
  explicit CriticOpt(const CriticParams& p)
      : w_embed(p.w_embed), w_x(p.cell.w_x), w_h(p.cell.w_h), b_embed(p.b_embed),
        b(p.cell.b), w_out(p.w_out) {}
  void step(CriticParams& p, CriticGrads& g, const TrainConfig& cfg) {
    const double norm = std::sqrt(g.squared_norm());
    if (norm > cfg.grad_clip_norm) g.scale(cfg.grad_clip_norm / norm);
    w_embed.apply(p.w_embed, g.w_embed, cfg.learning_rate, cfg.rmsprop_decay);
    b_embed.apply(p.b_embed, g.b_embed, cfg.learning_rate, cfg.rmsprop_decay);
    w_x.apply(p.cell.w_x, g.cell.w_x, cfg.learning_rate, cfg.rmsprop_decay);
    w_h.apply(p.cell.w_h, g.cell.w_h, cfg.learning_rate, cfg.rmsprop_decay);
    b.apply(p.cell.b, g.cell.b, cfg.learning_rate, cfg.rmsprop_decay);
    w_out.apply(p.w_out, g.w_out, cfg.learning_rate, cfg.rmsprop_decay);
    sq_b_out = cfg.rmsprop_decay * sq_b_out + (1.0 - cfg.rmsprop_decay) * g.b_out * g.b_out;
    p.b_out -= cfg.learning_rate * g.b_out / (std::sqrt(sq_b_out) + 1e-8);
  }
};

void clip_weights(CriticParams& p, double bound) {
  auto clip = [bound](auto& m) { m = m.cwiseMax(-bound).cwiseMin(bound).eval(); };
  clip(p.w_embed);
  clip(p.b_embed);
  clip(p.cell.w_x);
  clip(p.cell.w_h);
  clip(p.cell.b);
  clip(p.w_out);
  p.b_out = std::clamp(p.b_out, -bound, bound);
}

std::vector<OneHotBatch> draw_real_batch(const std::vector<walks::WalkTensor>& corpus,
                                         int batch, Rng& rng) {
  const int n_steps = corpus.front().n_steps();
  std::vector<OneHotBatch> tokens(n_steps, OneHotBatch(batch));
  for (int b = 0; b < batch; ++b) {
    const auto& walk = corpus[rng.uniform_int(static_cast<int>(corpus.size()))];
    for (int t = 0; t < n_steps; ++t) tokens[t][b] = walk.flat(t);
  }
  return tokens;
}

}  // namespace

TrainResult train(const std::vector<walks::WalkTensor>& corpus, const TrainConfig& cfg) {
  cfg.check();
  if (corpus.empty()) throw InvalidInputError("train: empty corpus");
  const int n_steps = corpus.front().n_steps();
  const int token_dim = corpus.front().token_dim();
  for (const auto& walk : corpus)
    if (walk.token_dim() != token_dim || walk.n_steps() != n_steps)
      throw InvalidInputError("train: corpus walks have inconsistent shapes");

  Rng rng(cfg.rng_seed);
  TrainedModel model;
  model.n_nodes = corpus.front().n_nodes();
  model.n_channels = corpus.front().n_channels();
  model.walk_length = n_steps;
  model.cfg = cfg;
  model.gen = init_generator_params(token_dim, cfg.hidden, cfg.noise_dim, cfg.z_sigma, rng);
  model.critic = init_critic_params(token_dim, cfg.embed_dim, cfg.hidden, rng);

  GenOpt gen_opt(model.gen);
  CriticOpt critic_opt(model.critic);

  TrainResult result;
  result.history.reserve(cfg.iterations);
  auto checkpoint = std::make_shared<TrainedModel>(model);

  const int batch = cfg.batch_size;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const double frac = cfg.iterations > 1 ? static_cast<double>(iter) / (cfg.iterations - 1) : 1.0;
    const double tau = cfg.tau_start + frac * (cfg.tau_end - cfg.tau_start);

    double critic_loss = 0.0;
    for (int k = 0; k < cfg.critic_steps_per_gen_step; ++k) {
      auto real = draw_real_batch(corpus, batch, rng);
      auto fake_roll = generate_rollout(model.gen, batch, n_steps, tau, SampleMode::Hard,
                                        rng, false);
      auto real_eval = critic_forward(model.critic, real, true);
      auto fake_eval = critic_forward(model.critic, fake_roll.token_idx, true);
      critic_loss = fake_eval.scores.mean() - real_eval.scores.mean();

      Vec dreal = Vec::Constant(batch, -1.0 / batch);
      Vec dfake = Vec::Constant(batch, 1.0 / batch);
      CriticGrads grads = critic_backward(model.critic, real_eval.cache, dreal, nullptr);
      CriticGrads fake_grads = critic_backward(model.critic, fake_eval.cache, dfake, nullptr);
      grads.w_embed += fake_grads.w_embed;
      grads.b_embed += fake_grads.b_embed;
      grads.cell.w_x += fake_grads.cell.w_x;
      grads.cell.w_h += fake_grads.cell.w_h;
      grads.cell.b += fake_grads.cell.b;
      grads.w_out += fake_grads.w_out;
      grads.b_out += fake_grads.b_out;

      critic_opt.step(model.critic, grads, cfg);
      clip_weights(model.critic, cfg.clip_bound);
    }

    // Generator descent on -E[D(fake)]; critic weights stay untouched.
    auto roll = generate_rollout(model.gen, batch, n_steps, tau, SampleMode::StraightThrough,
                                 rng, true);
    auto eval = critic_forward(model.critic, roll.token_idx, true);
    const double gen_loss = -eval.scores.mean();
    Vec dscores = Vec::Constant(batch, -1.0 / batch);
    std::vector<Mat> dtokens;
    critic_backward(model.critic, eval.cache, dscores, &dtokens);
    GeneratorGrads gen_grads = generator_backward(model.gen, roll, dtokens);
    gen_opt.step(model.gen, gen_grads, cfg);

    if (!std::isfinite(critic_loss) || !std::isfinite(gen_loss))
      throw TrainingError("train: non-finite loss at iteration " + std::to_string(iter),
                          checkpoint, iter);
    result.history.push_back({iter, critic_loss, gen_loss});
    if ((iter + 1) % cfg.checkpoint_every == 0)
      checkpoint = std::make_shared<TrainedModel>(model);
  }

  result.model = std::move(model);
  return result;
}

namespace {

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Mat mat_from_json(const json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  Mat m(rows, cols);
  const json& data = j.at("data");
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data.at(r).at(c).get<double>();
  return m;
}

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vec vec_from_json(const json& j) {
  Vec v(j.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

json config_to_json(const TrainConfig& c) {
  return json{{"iterations", c.iterations},
              {"critic_steps_per_gen_step", c.critic_steps_per_gen_step},
              {"clip_bound", c.clip_bound},
              {"learning_rate", c.learning_rate},
              {"tau_start", c.tau_start},
              {"tau_end", c.tau_end},
              {"batch_size", c.batch_size},
              {"rng_seed", c.rng_seed},
              {"hidden", c.hidden},
              {"noise_dim", c.noise_dim},
              {"embed_dim", c.embed_dim},
              {"z_sigma", c.z_sigma},
              {"grad_clip_norm", c.grad_clip_norm},
              {"rmsprop_decay", c.rmsprop_decay}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.iterations = j.at("iterations").get<int>();
  c.critic_steps_per_gen_step = j.at("critic_steps_per_gen_step").get<int>();
  c.clip_bound = j.at("clip_bound").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.tau_start = j.at("tau_start").get<double>();
  c.tau_end = j.at("tau_end").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  c.hidden = j.at("hidden").get<int>();
  c.noise_dim = j.at("noise_dim").get<int>();
  c.embed_dim = j.at("embed_dim").get<int>();
  c.z_sigma = j.at("z_sigma").get<double>();
  c.grad_clip_norm = j.at("grad_clip_norm").get<double>();
  c.rmsprop_decay = j.at("rmsprop_decay").get<double>();
  return c;
}

}  // namespace

std::string model_to_json(const TrainedModel& model) {
  json doc;
  doc["format_version"] = 1;
  doc["n_nodes"] = model.n_nodes;
  doc["n_channels"] = model.n_channels;
  doc["walk_length"] = model.walk_length;
  doc["config"] = config_to_json(model.cfg);
  doc["generator"] = {{"w_init", mat_to_json(model.gen.w_init)},
                      {"b_init", vec_to_json(model.gen.b_init)},
                      {"w_x", mat_to_json(model.gen.cell.w_x)},
                      {"w_h", mat_to_json(model.gen.cell.w_h)},
                      {"b", vec_to_json(model.gen.cell.b)},
                      {"w_proj", mat_to_json(model.gen.w_proj)},
                      {"b_proj", vec_to_json(model.gen.b_proj)},
                      {"z_sigma", model.gen.z_sigma}};
  doc["critic"] = {{"w_embed", mat_to_json(model.critic.w_embed)},
                   {"b_embed", vec_to_json(model.critic.b_embed)},
                   {"w_x", mat_to_json(model.critic.cell.w_x)},
                   {"w_h", mat_to_json(model.critic.cell.w_h)},
                   {"b", vec_to_json(model.critic.cell.b)},
                   {"w_out", vec_to_json(model.critic.w_out)},
                   {"b_out", model.critic.b_out}};
  return doc.dump() + "\n";
}

TrainedModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model JSON parse error: ") + e.what());
  }
  if (doc.at("format_version").get<int>() != 1)
    throw DataError("unsupported model format version");
  TrainedModel model;
  model.n_nodes = doc.at("n_nodes").get<int>();
  model.n_channels = doc.at("n_channels").get<int>();
  model.walk_length = doc.at("walk_length").get<int>();
  model.cfg = config_from_json(doc.at("config"));
  const json& g = doc.at("generator");
  model.gen.w_init = mat_from_json(g.at("w_init"));
  model.gen.b_init = vec_from_json(g.at("b_init"));
  model.gen.cell.w_x = mat_from_json(g.at("w_x"));
  model.gen.cell.w_h = mat_from_json(g.at("w_h"));
  model.gen.cell.b = vec_from_json(g.at("b"));
  model.gen.w_proj = mat_from_json(g.at("w_proj"));
  model.gen.b_proj = vec_from_json(g.at("b_proj"));
  model.gen.z_sigma = g.at("z_sigma").get<double>();
  const json& c = doc.at("critic");
  model.critic.w_embed = mat_from_json(c.at("w_embed"));
  model.critic.b_embed = vec_from_json(c.at("b_embed"));
  model.critic.cell.w_x = mat_from_json(c.at("w_x"));
  model.critic.cell.w_h = mat_from_json(c.at("w_h"));
  model.critic.cell.b = vec_from_json(c.at("b"));
  model.critic.w_out = vec_from_json(c.at("w_out"));
  model.critic.b_out = c.at("b_out").get<double>();
  return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(model));
}

TrainedModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_text_file(path));
}

void save_loss_history(const std::vector<LossRecord>& history,
                       const std::filesystem::path& path) {
  std::ostringstream out;
  out << "iteration,critic_loss,gen_loss\n";
  for (const auto& rec : history)
    out << rec.iteration << ',' << format_double(rec.critic_loss) << ','
        << format_double(rec.gen_loss) << '\n';
  write_text_file(path, out.str());
}

std::vector<LossRecord> load_loss_history(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::getline(in, line);  // header
  std::vector<LossRecord> history;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3) throw DataError("loss CSV: expected 3 columns");
    history.push_back({std::stoi(fields[0]), std::stod(fields[1]), std::stod(fields[2])});
  }
  return history;
}

}  // namespace gridforge::uggan
