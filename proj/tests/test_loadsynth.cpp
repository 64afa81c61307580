#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gridforge/loadsynth/load_model.hpp"
#include "test_util.hpp"

using namespace gridforge;
using namespace gridforge::loadsynth;

namespace {

MeterSeries constant_meter(const std::string& id, CustomerClass cls, int slots, int days,
                           double p, double q) {
  MeterSeries m;
  m.meter_id = id;
  m.customer_class = cls;
  for (int d = 0; d < days; ++d)
    for (int s = 0; s < slots; ++s) m.samples.push_back({s, p, q});
  return m;
}

// Trapezoid quadrature of a 1-D density.
template <typename F>
double quad1d(F&& f, double lo, double hi, int n) {
  const double dx = (hi - lo) / n;
  double total = 0.5 * (f(lo) + f(hi));
  for (int i = 1; i < n; ++i) total += f(lo + i * dx);
  return total * dx;
}

}  // namespace

TEST_CASE("aggregation: identity, sums, conservation") {
  auto m1 = constant_meter("m1", CustomerClass::Residential, 4, 2, 1.0, 0.25);
  auto m2 = constant_meter("m2", CustomerClass::Commercial, 4, 2, 1.0, 0.25);

  // One meter per transformer: output equals input.
  auto only = aggregate_meters({m1}, {{"m1", "t1"}});
  REQUIRE(only.size() == 1);
  CHECK(only[0].samples.size() == m1.samples.size());
  for (size_t i = 0; i < m1.samples.size(); ++i)
    CHECK(only[0].samples[i].p_kw == m1.samples[i].p_kw);

  // Two constant 1 kW meters sum to a constant 2 kW series.
  auto both = aggregate_meters({m1, m2}, {{"m1", "t1"}, {"m2", "t1"}});
  REQUIRE(both.size() == 1);
  for (const auto& s : both[0].samples) CHECK(s.p_kw == 2.0);

  // Unmapped meter.
  CHECK_THROWS_AS(aggregate_meters({m1, m2}, {{"m1", "t1"}}), DataError);
}

TEST_CASE("aggregation matches a direct summation oracle") {
  Rng rng(5);
  std::vector<MeterSeries> meters;
  std::map<std::string, std::string> tmap;
  const int slots = 6, days = 3;
  for (int k = 0; k < 5; ++k) {
    MeterSeries m;
    m.meter_id = "m" + std::to_string(k);
    m.customer_class = k < 3 ? CustomerClass::Residential : CustomerClass::Commercial;
    for (int d = 0; d < days; ++d)
      for (int s = 0; s < slots; ++s)
        // Values on a 1/64 grid so grouped sums are exact in floating point.
        m.samples.push_back({s, rng.uniform_int(640) / 64.0, rng.uniform_int(64) / 64.0});
    meters.push_back(std::move(m));
    tmap["m" + std::to_string(k)] = "t0";
  }
  auto agg = aggregate_meters(meters, tmap);
  REQUIRE(agg.size() == 1);
  CHECK(agg[0].customer_class == CustomerClass::Residential);  // 3 of 5 votes
  double meter_total = 0.0, agg_total = 0.0;
  for (size_t i = 0; i < agg[0].samples.size(); ++i) {
    double expected = 0.0;
    for (const auto& m : meters) expected += m.samples[i].p_kw;
    CHECK(agg[0].samples[i].p_kw == expected);
    meter_total += expected;
    agg_total += agg[0].samples[i].p_kw;
  }
  CHECK(meter_total == agg_total);  // energy conserved exactly on the 1/64 grid
}

TEST_CASE("meter csv round trip") {
  auto m = constant_meter("m9", CustomerClass::Industrial, 3, 2, 7.5, 1.25);
  auto path = std::filesystem::temp_directory_path() / "gf_meters_test.csv";
  save_meters_csv({m}, path);
  auto back = load_meters_csv(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].customer_class == CustomerClass::Industrial);
  REQUIRE(back[0].samples.size() == 6);
  CHECK(back[0].samples[4].p_kw == 7.5);
  std::filesystem::remove(path);
}

TEST_CASE("davies-bouldin on the hand instance") {
  // Clusters {0, 0.1} and {10, 10.1} in 1-D: DBI = (0.05 + 0.05) / 10 = 0.01.
  Mat profiles(4, 1);
  profiles << 0.0, 0.1, 10.0, 10.1;
  Mat centroids(2, 1);
  centroids << 0.05, 10.05;
  std::vector<int> members{0, 0, 1, 1};
  CHECK(davies_bouldin(profiles, centroids, members) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("cluster selection picks k=2 on two separated blobs") {
  Rng rng(9);
  const int per_blob = 12, d = 8;
  Mat profiles(2 * per_blob, d);
  for (int i = 0; i < per_blob; ++i)
    for (int j = 0; j < d; ++j) {
      profiles(i, j) = 0.0 + 0.05 * rng.normal();
      profiles(per_blob + i, j) = 5.0 + 0.05 * rng.normal();
    }
  auto model = cluster_profiles(profiles, 2, 6, 3);
  CHECK(model.k == 2);
  // DBI value matches a direct recomputation to 1e-12.
  CHECK(model.dbi ==
        doctest::Approx(davies_bouldin(profiles, model.centroids, model.memberships))
            .epsilon(1e-12));
  // Reproducible for a fixed seed.
  auto again = cluster_profiles(profiles, 2, 6, 3);
  CHECK(again.k == model.k);
  CHECK(again.dbi == model.dbi);
}

TEST_CASE("cluster error paths") {
  Mat profiles = Mat::Ones(6, 3);
  CHECK_THROWS_AS(cluster_profiles(profiles, 2, 4, 1), DataError);  // identical rows
  Mat ok(4, 2);
  ok << 0, 0, 1, 1, 2, 2, 3, 3;
  CHECK_THROWS_AS(cluster_profiles(ok, 2, 5, 1), ConfigError);  // k_max > n-1
  CHECK_THROWS_AS(cluster_profiles(ok, 1, 2, 1), ConfigError);  // k_min < 2
}

TEST_CASE("kde: single-sample peak and normalization by quadrature") {
  Mat one(1, 1);
  one << 2.5;
  Vec h = Vec::Ones(1);
  auto model = fit_kde(one, h);
  Vec x(1);
  x << 2.5;
  CHECK(model.pdf(x) == doctest::Approx(1.0 / std::sqrt(2.0 * 3.14159265358979323846)));

  // Quadrature over +-8h around the data equals 1 within 1e-3.
  auto f = [&](double v) {
    Vec p(1);
    p << v;
    return model.pdf(p);
  };
  CHECK(quad1d(f, 2.5 - 8.0, 2.5 + 8.0, 4000) == doctest::Approx(1.0).epsilon(1e-3));

  // A 2-D fitted model integrates to 1 as well.
  Rng rng(4);
  Mat samples(40, 2);
  for (int i = 0; i < 40; ++i) {
    samples(i, 0) = rng.normal();
    samples(i, 1) = 3.0 + 0.5 * rng.normal();
  }
  auto model2 = fit_kde(samples);
  const double h0 = model2.bandwidths[0], h1 = model2.bandwidths[1];
  const double lo0 = samples.col(0).minCoeff() - 8 * h0, hi0 = samples.col(0).maxCoeff() + 8 * h0;
  const double lo1 = samples.col(1).minCoeff() - 8 * h1, hi1 = samples.col(1).maxCoeff() + 8 * h1;
  const int n0 = 220, n1 = 220;
  double integral = 0.0;
  for (int a = 0; a <= n0; ++a)
    for (int b = 0; b <= n1; ++b) {
      Vec p(2);
      p << lo0 + (hi0 - lo0) * a / n0, lo1 + (hi1 - lo1) * b / n1;
      const double w = ((a == 0 || a == n0) ? 0.5 : 1.0) * ((b == 0 || b == n1) ? 0.5 : 1.0);
      integral += w * model2.pdf(p);
    }
  integral *= (hi0 - lo0) / n0 * (hi1 - lo1) / n1;
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("kde converges to the standard normal density") {
  Rng rng(1);
  Mat samples(10000, 1);
  for (int i = 0; i < 10000; ++i) samples(i, 0) = rng.normal();
  auto model = fit_kde(samples);
  double worst = 0.0;
  for (double x = -3.0; x <= 3.0; x += 0.1) {
    Vec p(1);
    p << x;
    const double truth = std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
    worst = std::max(worst, std::abs(model.pdf(p) - truth));
  }
  CHECK(worst < 0.02);
}

TEST_CASE("kde error paths") {
  Mat flat = Mat::Ones(5, 1);
  CHECK_THROWS_AS(fit_kde(flat), NumericError);  // zero variance, auto bandwidth
  Mat one(1, 1);
  one << 1.0;
  CHECK_THROWS_AS(fit_kde(one), NumericError);  // single sample, auto bandwidth
  Vec bad = Vec::Zero(1);
  CHECK_THROWS_AS(fit_kde(one, bad), ConfigError);
}

TEST_CASE("conditional density: uniform weights, normalization, separation") {
  // All samples at the conditioning slot: conditional equals the plain 1-D KDE.
  Mat samples(20, 2);
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    samples(i, 0) = 5.0 + rng.normal();
    samples(i, 1) = 3.0;
  }
  Vec bw(2);
  bw << 0.4, 1.0;
  auto model = fit_kde(samples, bw);
  auto cond = conditional_density(model, 3.0);
  Mat p_only = samples.col(0);
  Vec bw1 = bw.head(1);
  auto ref = fit_kde(p_only, bw1);
  for (double x = 2.0; x <= 8.0; x += 0.5) {
    Vec px(1);
    px << x;
    CHECK(cond.pdf(x) == doctest::Approx(ref.pdf(px)).epsilon(1e-12));
  }
  // Quadrature of the conditional equals 1 within 1e-3.
  const double lo = samples.col(0).minCoeff() - 8 * bw[0];
  const double hi = samples.col(0).maxCoeff() + 8 * bw[0];
  CHECK(quad1d([&](double x) { return cond.pdf(x); }, lo, hi, 4000) ==
        doctest::Approx(1.0).epsilon(1e-3));

  // Two slots with disjoint P ranges and a small time bandwidth: conditioning
  // on slot 1 leaves < 1e-6 of the mass in slot 2's range.
  Mat two(8, 2);
  two << 1.0, 1, 1.1, 1, 0.9, 1, 1.05, 1, 100.0, 2, 100.1, 2, 99.9, 2, 100.05, 2;
  Vec bw2(2);
  bw2 << 0.1, 0.1;
  auto model2 = fit_kde(two, bw2);
  auto cond1 = conditional_density(model2, 1.0);
  const double far_mass = quad1d([&](double x) { return cond1.pdf(x); }, 90.0, 110.0, 2000);
  CHECK(far_mass < 1e-6);

  // Unsupported slot.
  CHECK_THROWS_AS(conditional_density(model2, 500.0), DataError);
}

namespace {

// Small synthetic world: residential transformers with sinusoidal daily
// shapes, one flat industrial transformer.
struct World {
  std::vector<MeterSeries> transformers;
  TransformerMap tmap;
  int n_slots = 24;
};

World make_world(int n_res = 8, int days = 10) {
  World w;
  Rng rng(42);
  for (int k = 0; k < n_res; ++k) {
    MeterSeries t;
    t.meter_id = "T" + std::to_string(k);
    t.customer_class = CustomerClass::Residential;
    const double base = 8.0 + k * 0.5;
    const double swing = (k % 2 == 0) ? 0.3 : 0.45;  // two shape families
    for (int d = 0; d < days; ++d)
      for (int s = 0; s < w.n_slots; ++s) {
        const double shape =
            1.0 + swing * std::sin(2.0 * 3.14159265358979 * (s + 2.0 * (k % 2)) / w.n_slots);
        const double p = base * shape * (1.0 + 0.02 * rng.normal());
        t.samples.push_back({s, p, p * 0.2});
      }
    w.transformers.push_back(std::move(t));
    w.tmap.transformers["T" + std::to_string(k)] = {"T" + std::to_string(k), k + 1, false};
  }
  MeterSeries ind;
  ind.meter_id = "TI";
  ind.customer_class = CustomerClass::Industrial;
  for (int d = 0; d < days; ++d)
    for (int s = 0; s < w.n_slots; ++s) ind.samples.push_back({s, 500.0, 150.0});
  w.transformers.push_back(std::move(ind));
  w.tmap.transformers["TI"] = {"TI", n_res + 1, true};
  return w;
}

}  // namespace

TEST_CASE("sample_series: constant profile stays near its level; determinism") {
  World w = make_world();
  auto model = fit_load_model(w.transformers, w.tmap, w.n_slots, 7);
  // Industrial node: constant 500 kW profile, tiny fallback bandwidth.
  const int node = static_cast<int>(w.transformers.size());  // n_res + 1
  Rng rng1(3), rng2(3);
  auto s1 = sample_series(model, node, 4, rng1);
  auto s2 = sample_series(model, node, 4, rng2);
  REQUIRE(s1.size() == s2.size());
  for (size_t i = 0; i < s1.size(); ++i) {
    CHECK(s1[i].p_kw == s2[i].p_kw);  // fixed seed, identical series
    CHECK(s1[i].p_kw == doctest::Approx(500.0).epsilon(0.1));
    CHECK(s1[i].p_kw >= 0.0);
    // Industrial power factor 0.90.
    CHECK(s1[i].q_kvar ==
          doctest::Approx(s1[i].p_kw * std::tan(std::acos(0.90))).epsilon(1e-12));
  }
}

TEST_CASE("sampled per-slot means track the training means") {
  World w = make_world();
  auto model = fit_load_model(w.transformers, w.tmap, w.n_slots, 7);

  // Per-unit training mean per slot for the cluster containing transformer 0.
  const int node = 1;
  Rng rng(11);
  auto series = sample_series(model, node, 10000, rng);
  Vec sampled_mean = Vec::Zero(w.n_slots);
  for (size_t i = 0; i < series.size(); ++i) sampled_mean[i % w.n_slots] += series[i].p_kw;
  sampled_mean /= 10000.0;

  // Empirical oracle: mean of the cluster's training values near each slot,
  // weighted exactly like the conditional density does.
  const auto& kde = model.kde_for(node);
  const double scale = model.node_assignment.at(node).scale_kw;
  for (int s = 0; s < w.n_slots; ++s) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < kde.n(); ++i) {
      const double u = (double(s) - kde.samples(i, 1)) / kde.bandwidths[1];
      const double wgt = std::exp(-0.5 * u * u);
      num += wgt * kde.samples(i, 0);
      den += wgt;
    }
    const double expected = scale * num / den;
    CHECK(std::abs(sampled_mean[s] - expected) / expected < 0.05);
  }
}

TEST_CASE("dg model: single scenario equals plain kde; night output is zero") {
  std::vector<MeterSeries> pv;
  MeterSeries day;
  day.meter_id = "pv1";
  day.customer_class = CustomerClass::Commercial;
  for (int d = 0; d < 20; ++d)
    for (int s = 0; s < 24; ++s) {
      const double out = (s >= 7 && s <= 17)
                             ? 50.0 * std::sin(3.14159265358979 * (s - 7) / 10.0) + 5.0
                             : 0.0;
      day.samples.push_back({s, out, 0.0});
    }
  pv.push_back(day);
  auto models = fit_dg_model(pv, {{"pv1", "sunny"}});
  REQUIRE(models.size() == 1);
  const auto& sunny = models.at("sunny");

  // Identical to fit_kde on that subset.
  Mat samples(day.samples.size(), 2);
  for (size_t i = 0; i < day.samples.size(); ++i) {
    samples(i, 0) = day.samples[i].p_kw;
    samples(i, 1) = day.samples[i].slot;
  }
  CHECK(sunny.kde.n() == static_cast<int>(day.samples.size()));
  Vec probe(2);
  probe << 20.0, 12.0;
  Vec bw = sunny.kde.bandwidths;
  auto ref = fit_kde(samples, bw);
  CHECK(sunny.kde.pdf(probe) == doctest::Approx(ref.pdf(probe)).epsilon(1e-12));

  // Night slots: training data is identically zero there, injections are 0.
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    CHECK(sample_dg_injection(sunny, 2, rng) == 0.0);
    CHECK(sample_dg_injection(sunny, 12, rng) <= 0.0);
  }

  // Per-scenario sampled means track the empirical means within 5%.
  double mean_noon = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) mean_noon += -sample_dg_injection(sunny, 12, rng);
  mean_noon /= n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < sunny.kde.n(); ++i) {
    const double u = (12.0 - sunny.kde.samples(i, 1)) / sunny.kde.bandwidths[1];
    const double wgt = std::exp(-0.5 * u * u);
    num += wgt * sunny.kde.samples(i, 0);
    den += wgt;
  }
  CHECK(std::abs(mean_noon - num / den) / (num / den) < 0.05);

  CHECK_THROWS_AS(fit_dg_model(pv, {}), ConfigError);
}
