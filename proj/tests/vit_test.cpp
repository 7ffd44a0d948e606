#include <gtest/gtest.h>

#include <cmath>

#include "dvit/errors.hpp"
#include "dvit/grad_check.hpp"
#include "dvit/vit.hpp"
#include "test_util.hpp"

using namespace dvit;
using dvit::test::random_frame;

namespace {

VitModel tiny_model(std::uint64_t seed = 1) {
  SeededGenerator rng(seed);
  return VitModel::initialize(VitConfig::tiny(), rng);
}

PatchSequence tiny_patches(std::uint64_t seed) {
  SeededGenerator rng(seed);
  return patchify(random_frame(8, 8, 3, rng, -1.0, 1.0), 4);
}

}  // namespace

TEST(Config, DefaultShapes) {
  const VitConfig c;
  EXPECT_EQ(c.num_patches(), 196u);
  EXPECT_EQ(c.patch_elements(), 2352u);
  EXPECT_EQ(c.head_dim(), 16u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ValidationNamesTheConstraint) {
  VitConfig c;
  c.patch_size = 30;
  try {
    c.validate();
    FAIL();
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("divisible"), std::string::npos);
  }
  c = VitConfig{};
  c.num_heads = 5;
  EXPECT_THROW(c.validate(), ContractError);
  c = VitConfig{};
  c.transformer_units = {128, 32};
  EXPECT_THROW(c.validate(), ContractError);
}

TEST(Config, KeyValueRoundTrip) {
  VitConfig c = VitConfig::tiny();
  c.channel_mean = {0.1, 0.2, 0.3};
  c.channel_std = {0.5, 0.25, 0.125};
  c.learning_rate = 0.0003;
  EXPECT_EQ(VitConfig::from_key_values(c.to_key_values()), c);
}

TEST(Config, OverridesAndUnknownKeys) {
  const VitConfig c = VitConfig::from_key_values(parse_key_values("num_epochs = 3\npatch_size = 14\n"));
  EXPECT_EQ(c.epochs, 3u);
  EXPECT_EQ(c.patch_size, 14u);
  EXPECT_EQ(c.batch_size, 256u);
  EXPECT_THROW(VitConfig::from_key_values(parse_key_values("bogus = 1\n")), FormatError);
}

TEST(Patches, DefaultGeometry) {
  const VitConfig c;
  SeededGenerator rng(1);
  const PatchSequence s = patchify(random_frame(392, 392, 3, rng), c.patch_size);
  EXPECT_EQ(s.count, 196u);
  EXPECT_EQ(s.elements_per_patch, 2352u);
  EXPECT_EQ(s.rows.shape(), (Shape{196, 2352}));
}

TEST(Patches, LayoutMatchesIndexOracle) {
  SeededGenerator rng(2);
  const ImageFrame f = random_frame(6, 9, 2, rng);
  const PatchSequence s = patchify(f, 3);
  ASSERT_EQ(s.count, 6u);
  for (std::size_t p = 0; p < 6; ++p)
    for (std::size_t y = 0; y < 3; ++y)
      for (std::size_t x = 0; x < 3; ++x)
        for (std::size_t c = 0; c < 2; ++c)
          EXPECT_EQ(s.rows.at(p, (y * 3 + x) * 2 + c), f.at((p / 3) * 3 + y, (p % 3) * 3 + x, c));
  EXPECT_EQ(unpatchify(s, 6, 9, 2, 3), f);
  EXPECT_THROW(patchify(f, 4), ContractError);
  EXPECT_THROW(unpatchify(s, 6, 6, 2, 3), ContractError);
}

TEST(Model, ParameterCountAndNames) {
  const VitModel m = tiny_model();
  std::size_t total = 0;
  for (const auto& p : m.parameters()) total += p.numel();
  // embedding 48*8 + 8 + 5*8; encoder 16 + 2*3*32 + 64 + 16 + (128+16) + (128+8);
  // final norm 16; head 64 + 8; classifier 16 + 2.
  EXPECT_EQ(total, 432u + 568u + 16u + 72u + 18u);
  const auto named = m.named_parameters();
  EXPECT_EQ(named.front().name, "embedding.projection");
  EXPECT_EQ(named.back().name, "classifier.bias");
}

TEST(Model, InitialisationStatistics) {
  VitConfig c;  // full size for better statistics
  c.transformer_layers = 1;
  SeededGenerator rng(3);
  const VitModel m = VitModel::initialize(c, rng);
  const auto w = m.embedding.projection.data();
  double s = 0.0, s2 = 0.0;
  for (double v : w) {
    s += v;
    s2 += v * v;
    ASSERT_EQ(v, static_cast<double>(static_cast<float>(v)));
  }
  const double n = static_cast<double>(w.size());
  EXPECT_NEAR(s / n, 0.0, 1e-3);
  EXPECT_NEAR(std::sqrt(s2 / n), 0.02, 5e-4);
  for (double v : m.layers[0].attention_norm.gain.data()) EXPECT_EQ(v, 1.0);
  for (double v : m.classifier.bias.data()) EXPECT_EQ(v, 0.0);
}

TEST(Model, SameSeedSameModelCloneIndependent) {
  const VitModel a = tiny_model(4), b = tiny_model(4);
  const auto pa = a.parameters(), pb = b.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i)
    for (std::size_t j = 0; j < pa[i].numel(); ++j) ASSERT_EQ(pa[i].data()[j], pb[i].data()[j]);
  VitModel c = a.clone();
  c.classifier.weight.mutable_data()[0] += 1.0;
  EXPECT_NE(c.classifier.weight.data()[0], a.classifier.weight.data()[0]);
}

TEST(Forward, AttentionHeadMatchesNaiveOracle) {
  SeededGenerator rng(5);
  const Tensor z({3, 4}, [&] {
    std::vector<double> v(12);
    for (double& x : v) x = rng.uniform(-1, 1);
    return v;
  }());
  const auto mk = [&] {
    std::vector<double> v(8);
    for (double& x : v) x = rng.uniform(-1, 1);
    return Tensor({4, 2}, v);
  };
  const AttentionHeadParams p{mk(), mk(), mk()};
  AttentionState st;
  const Tensor out = attention_head(z, p, &st);
  // Naive: q_i . k_j / sqrt(2), softmax over j, weighted sum of v_j.
  const auto proj = [&](const Tensor& w, std::size_t i, std::size_t c) {
    double s = 0.0;
    for (std::size_t t = 0; t < 4; ++t) s += z.at(i, t) * w.at(t, c);
    return s;
  };
  for (std::size_t i = 0; i < 3; ++i) {
    double scores[3], mx = -1e300, denom = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      scores[j] = (proj(p.query, i, 0) * proj(p.key, j, 0) + proj(p.query, i, 1) * proj(p.key, j, 1)) / std::sqrt(2.0);
      mx = std::max(mx, scores[j]);
    }
    for (double& s : scores) denom += (s = std::exp(s - mx));
    for (std::size_t c = 0; c < 2; ++c) {
      double expect = 0.0;
      for (std::size_t j = 0; j < 3; ++j) expect += scores[j] / denom * proj(p.value, j, c);
      EXPECT_NEAR(out.at(i, c), expect, 1e-12);
    }
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(st.weights.at(i, j), scores[j] / denom, 1e-12);
  }
}

TEST(Forward, AttentionRowsAreStochastic) {
  const VitModel m = tiny_model(6);
  for (std::uint64_t s = 0; s < 10; ++s) {
    std::vector<std::vector<AttentionState>> states;
    ForwardOptions opts;
    opts.attention = &states;
    forward_logits(m, tiny_patches(s), opts);
    ASSERT_EQ(states.size(), 1u);
    ASSERT_EQ(states[0].size(), 2u);
    for (const auto& head : states[0]) {
      ASSERT_EQ(head.weights.shape(), (Shape{5, 5}));
      for (std::size_t i = 0; i < 5; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < 5; ++j) {
          EXPECT_GE(head.weights.at(i, j), 0.0);
          row += head.weights.at(i, j);
        }
        EXPECT_NEAR(row, 1.0, 1e-12);
      }
    }
  }
}

TEST(Forward, ZeroedSublayersGiveIdentityEncoder) {
  VitModel m = tiny_model(7);
  auto& layer = m.layers[0];
  for (double& v : layer.output_projection.mutable_data()) v = 0.0;
  for (double& v : layer.mlp.back().weight.mutable_data()) v = 0.0;
  for (double& v : layer.mlp.back().bias.mutable_data()) v = 0.0;
  SeededGenerator rng(8);
  const Tensor z({5, 8}, [&] {
    std::vector<double> v(40);
    for (double& x : v) x = rng.uniform(-3, 3);
    return v;
  }());
  const Tensor out = encoder_layer(z, layer, kLayerNormEps);
  for (std::size_t i = 0; i < z.numel(); ++i) EXPECT_EQ(out.data()[i], z.data()[i]);
}

TEST(Forward, EmbeddingPrependsClassTokenAndAddsPositions) {
  const VitModel m = tiny_model(9);
  const PatchSequence s = tiny_patches(1);
  const Tensor z = embed_patches(s, m.embedding);
  ASSERT_EQ(z.shape(), (Shape{5, 8}));
  for (std::size_t j = 0; j < 8; ++j)
    EXPECT_EQ(z.at(0, j), m.embedding.class_token.at(0, j) + m.embedding.position.at(0, j));
  double x = 0.0;
  for (std::size_t t = 0; t < 48; ++t) x += s.rows.at(2, t) * m.embedding.projection.at(t, 3);
  EXPECT_NEAR(z.at(3, 3), x + m.embedding.position.at(3, 3), 1e-14);
}

TEST(Forward, ClassifyGivesProbabilitiesAndChecksResolution) {
  const VitModel m = tiny_model(10);
  SeededGenerator rng(11);
  const auto p = forward_classify(m, random_frame(8, 8, 3, rng));
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
  EXPECT_THROW(forward_classify(m, random_frame(16, 16, 3, rng)), ContractError);
  const ImageFrame raw = random_frame(20, 13, 3, rng, 0.0, 255.0);
  const ImageFrame pre = preprocess(m.config(), raw);
  EXPECT_EQ(pre.height(), 8u);
  EXPECT_EQ(pre.width(), 8u);
}

TEST(Forward, WholeModelGradientMatchesFiniteDifferences) {
  const VitModel m = tiny_model(12);
  const PatchSequence s = tiny_patches(13);
  const std::size_t target[] = {1};
  const GradCheckResult r =
      finite_diff_check([&] { return cross_entropy_logits(forward_logits(m, s), target); }, m.parameters());
  EXPECT_LT(r.max_rel_error, 1e-4);
  EXPECT_EQ(r.per_param.size(), m.parameters().size());
}
