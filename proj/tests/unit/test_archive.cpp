#include <gtest/gtest.h>

#include <filesystem>
#include <limits>

#include <nlohmann/json.hpp>

#include "anovagp/archive.hpp"
#include "anovagp/emulator.hpp"
#include "anovagp/rng.hpp"
#include "anovagp/sim_cache.hpp"

using namespace anovagp;

namespace {

AnovaGpEmulator small_anova_gp() {
  const auto sim = analytic_bank("polynomial-mix", 3, 4);
  SimCache cache(sim);
  AnovaGpOptions opts;
  opts.local.n_train = 12;
  opts.local.pool_size = 100;
  opts.local.gp.restarts = 2;
  return build_anova_gp(cache, AnchorPoint::mean_of(sim->inputs()), opts).emulator;
}

}  // namespace

TEST(Archive, AnovaGpRoundTripIsBitwise) {
  const AnovaGpEmulator emu = small_anova_gp();
  const auto bytes = encode(emu);
  EXPECT_EQ(archive_kind(bytes), EmulatorKind::AnovaGp);
  const AnovaGpEmulator back = decode_anova_gp(bytes);
  EXPECT_EQ(back.selection().all(), emu.selection().all());
  EXPECT_EQ(back.selection().candidate_counts, emu.selection().candidate_counts);
  EXPECT_EQ(back.selection().weights, emu.selection().weights);
  Rng rng(1);
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXd xi(3);
    for (int i = 0; i < 3; ++i) xi(i) = rng.uniform();
    EXPECT_EQ(back.predict_mean(xi), emu.predict_mean(xi));
    EXPECT_EQ(back.predict_variance(xi), emu.predict_variance(xi));
  }
  EXPECT_EQ(encode(back), bytes);
}

TEST(Archive, SgpRoundTripThroughFile) {
  const auto sim = analytic_bank("rank-one-product", 2, 3);
  SgpOptions o;
  o.n_train = 15;
  o.gp.restarts = 1;
  o.gp.jitter_floor = 0.0;  // exercises the -inf jitter encoding
  const SgpEmulator sgp = train_sgp(*sim, o);
  const auto path = std::filesystem::temp_directory_path() / "anovagp_archive_test" / "sgp.emu";
  save_emulator(sgp, path);
  const auto bytes = read_archive(path);
  EXPECT_EQ(archive_kind(bytes), EmulatorKind::Sgp);
  const SgpEmulator back = decode_sgp(bytes);
  ASSERT_GE(back.rank(), 1u);
  EXPECT_EQ(back.mode_gps[0].hyper().log_jitter_var, -std::numeric_limits<double>::infinity());
  const Eigen::Vector2d xi(0.3, 0.6);
  EXPECT_EQ(back.predict_mean(xi), sgp.predict_mean(xi));
  EXPECT_EQ(encode(back), bytes);
  std::filesystem::remove_all(path.parent_path());
}

TEST(Archive, RejectsWrongKindVersionAndGarbage) {
  const auto sim = analytic_bank("additive", 2, 2);
  SgpOptions o;
  o.n_train = 6;
  o.gp.restarts = 1;
  const auto bytes = encode(train_sgp(*sim, o));
  EXPECT_THROW(decode_anova_gp(bytes), std::runtime_error);

  auto doc = nlohmann::json::from_cbor(bytes);
  doc["version"] = 999;
  EXPECT_THROW(decode_sgp(nlohmann::json::to_cbor(doc)), std::runtime_error);

  const std::vector<std::uint8_t> garbage{1, 2, 3, 4};
  EXPECT_THROW(archive_kind(garbage), std::runtime_error);
  EXPECT_THROW(read_archive("/nonexistent/anovagp.emu"), std::runtime_error);
}
