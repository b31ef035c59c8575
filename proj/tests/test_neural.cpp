#include "speechbio/adamw.hpp"
#include "speechbio/attention.hpp"
#include "speechbio/checkpoint.hpp"
#include "speechbio/layers.hpp"
#include "speechbio/lstm.hpp"
#include "support/layer_gradchecks.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace speechbio;
using namespace speechbio::nn;

TEST(Linear, IdentityAndHandExample) {
    linear id{ 3, 3 };
    id.weight().value.fill(0.0);
    id.bias().value.fill(0.0);
    for (std::size_t i = 0; i < 3; ++i) {
        id.weight().value.at(i, i) = 1.0;
    }
    const tensor x{ { 2, 3 }, { 1, -2, 3, 4, 5, -6 } };
    EXPECT_EQ(id.forward(x).raw(), x.raw());

    linear l{ 2, 1 };
    l.weight().value = tensor{ { 2, 1 }, { 1, 1 } };
    l.bias().value = tensor{ { 1 }, { 0.5 } };
    EXPECT_DOUBLE_EQ(l.forward(tensor{ { 1, 2 }, { 1, 2 } })[0], 3.5);
}

TEST(Linear, ShapeMismatch) {
    linear l{ 3, 2 };
    EXPECT_THROW(l.forward(tensor::matrix(1, 4)), shape_error);
}

TEST(Linear, InitBounds) {
    linear l{ 16, 4 };
    rng r{ 3 };
    l.init(r);
    for (const double w : l.weight().value.raw()) {
        EXPECT_LE(std::abs(w), 0.25);
    }
}

TEST(LeakyRelu, Values) {
    leaky_relu a;
    const auto y = a.forward(tensor{ { 3 }, { 5.0, -1.0, 0.0 } });
    EXPECT_DOUBLE_EQ(y[0], 5.0);
    EXPECT_DOUBLE_EQ(y[1], -0.01);
    const auto g = a.backward(tensor{ { 3 }, { 1.0, 1.0, 1.0 } });
    EXPECT_DOUBLE_EQ(g[1], 0.01);
    EXPECT_DOUBLE_EQ(g[2], 1.0);
}

TEST(Dropout, EvalAndZeroProbabilityAreIdentity) {
    rng r{ 1 };
    const tensor x = test::random_tensor(r, { 4, 5 });
    dropout d{ 0.2 };
    EXPECT_EQ(d.forward(x, mode::eval, r).raw(), x.raw());
    dropout none{ 0.0 };
    EXPECT_EQ(none.forward(x, mode::train, r).raw(), x.raw());
}

TEST(Dropout, RejectsProbabilityOne) { EXPECT_THROW(dropout{ 1.0 }, config_error); }

TEST(Dropout, LawOfLargeNumbers) {
    rng r{ 7 };
    tensor x{ { 1000000 }, 1.0 };
    dropout d{ 0.2 };
    const auto y = d.forward(x, mode::train, r);
    std::size_t kept = 0;
    double sum = 0.0;
    for (const double v : y.raw()) {
        kept += v != 0.0;
        sum += v;
    }
    EXPECT_NEAR(static_cast<double>(kept) / 1e6, 0.8, 0.01);
    EXPECT_NEAR(sum / 1e6, 1.0, 0.01);
}

TEST(Bce, ClosedForms) {
    EXPECT_NEAR(bce_with_logits(0.0, 1.0), std::log(2.0), 1e-12);
    EXPECT_LE(bce_with_logits(100.0, 1.0), 1e-10);
    EXPECT_DOUBLE_EQ(bce_with_logits_grad(0.0, 1.0), -0.5);
}

TEST(Bce, FiniteForHugeLogits) {
    for (const double z : { -1e6, -1e3, -50.0, 0.0, 50.0, 1e3, 1e6 }) {
        for (const double y : { 0.0, 1.0 }) {
            EXPECT_TRUE(std::isfinite(bce_with_logits(z, y)));
            EXPECT_TRUE(std::isfinite(bce_with_logits_grad(z, y)));
        }
    }
}

TEST(Bce, BatchIsMean) {
    std::vector<double> dz;
    const std::vector<double> z{ 0.0, 2.0 };
    const std::vector<double> y{ 1.0, 0.0 };
    const double l = bce_with_logits_batch(z, y, dz);
    EXPECT_NEAR(l, (bce_with_logits(0.0, 1.0) + bce_with_logits(2.0, 0.0)) / 2.0, 1e-15);
    EXPECT_NEAR(dz[1], sigmoid(2.0) / 2.0, 1e-15);
}

TEST(Lstm, ZeroWeightsAndStates) {
    lstm_weights w{ 3, 2, "c" };
    const std::vector<double> x(3, 0.0);
    const std::vector<double> z(2, 0.0);
    const auto s = lstm_cell_forward(x, z, z, w);
    for (std::size_t j = 0; j < 2; ++j) {
        EXPECT_EQ(s.h[j], 0.0);
        EXPECT_EQ(s.c[j], 0.0);
    }
}

TEST(Lstm, LargeForgetBiasKeepsCell) {
    lstm_weights w{ 2, 3, "c" };
    for (std::size_t j = 3; j < 6; ++j) {
        w.bias.value[j] = 10.0;
    }
    const std::vector<double> x{ 0.3, -0.7 };
    const std::vector<double> h(3, 0.0);
    const std::vector<double> c(3, 1.0);
    const auto s = lstm_cell_forward(x, h, c, w);
    for (const double v : s.c) {
        EXPECT_NEAR(v, 1.0, 1e-4);
    }
}

TEST(Lstm, InitSetsForgetBias) {
    lstm_weights w{ 4, 3, "c" };
    rng r{ 5 };
    w.init(r);
    for (std::size_t j = 0; j < 12; ++j) {
        EXPECT_EQ(w.bias.value[j], j >= 3 && j < 6 ? 1.0 : 0.0);
    }
}

TEST(Bilstm, ShapesAndSingleStep) {
    bilstm b{ 5, 4, 2 };
    rng r{ 2 };
    b.init(r);
    EXPECT_EQ(b.forward(test::random_tensor(r, { 7, 5 })).shape(), (std::vector<std::size_t>{ 7, 8 }));
    EXPECT_EQ(b.forward(test::random_tensor(r, { 1, 5 })).shape(), (std::vector<std::size_t>{ 1, 8 }));
}

TEST(Bilstm, SpecifiedShapeGradcheck) {
    rng r{ 11 };
    bilstm b{ 8, 6, 2 };
    b.init(r);
    tensor x = test::random_tensor(r, { 5, 8 });
    const tensor c = test::random_tensor(r, { 5, 12 });
    zero_grads(b.parameters());
    b.forward(x);
    const tensor dx = b.backward(c);
    std::vector<test::grad_block> blocks{ { &x.raw(), dx.raw() } };
    test::add_param_blocks(blocks, b.parameters());
    const auto res = test::check_gradients([&] { return test::project(b.forward(x), c); }, blocks);
    EXPECT_LT(res.max_rel_error, 1e-4);
}

TEST(Attention, SingleStepIsOutputOfValue) {
    multi_head_attention a{ { 4, 2 } };
    rng r{ 3 };
    a.init(r);
    const tensor x = test::random_tensor(r, { 1, 4 });
    const tensor y = a.forward(x);
    EXPECT_DOUBLE_EQ(a.attention_weights(0).at(0, 0), 1.0);
    const tensor expect = matmul(matmul(x, a.value_weight().value), a.output_weight().value);
    for (std::size_t c = 0; c < 4; ++c) {
        EXPECT_NEAR(y[c], expect[c], 1e-12);
    }
}

TEST(Attention, EqualKeysGiveUniformWeights) {
    multi_head_attention a{ { 4, 2 } };
    rng r{ 4 };
    a.init(r);
    a.key_weight().value.fill(0.0);
    a.forward(test::random_tensor(r, { 5, 4 }));
    for (std::size_t h = 0; h < 2; ++h) {
        for (std::size_t i = 0; i < 5; ++i) {
            for (std::size_t j = 0; j < 5; ++j) {
                EXPECT_NEAR(a.attention_weights(h).at(i, j), 0.2, 1e-12);
            }
        }
    }
}

TEST(Attention, RowsSumToOneAndMaskedKeysVanish) {
    multi_head_attention a{ { 6, 2 } };
    rng r{ 8 };
    a.init(r);
    const std::vector<bool> mask{ true, false, true, true, false };
    a.forward(test::random_tensor(r, { 5, 6 }, 3.0), mask);
    for (std::size_t h = 0; h < 2; ++h) {
        for (std::size_t i = 0; i < 5; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < 5; ++j) {
                s += a.attention_weights(h).at(i, j);
                if (!mask[j]) {
                    EXPECT_LT(a.attention_weights(h).at(i, j), 1e-30);
                }
            }
            EXPECT_NEAR(s, 1.0, 1e-9);
        }
    }
}

TEST(Attention, IndivisibleDimRejected) { EXPECT_THROW((multi_head_attention{ { 5, 2 } }), config_error); }

TEST(MeanPool, Examples) {
    const tensor one{ { 1, 3 }, { 1, 2, 3 } };
    EXPECT_EQ(mean_pool(one).raw(), (std::vector<double>{ 1, 2, 3 }));
    const tensor two{ { 2, 2 }, { 1, 1, 3, 3 } };
    EXPECT_EQ(mean_pool(two).raw(), (std::vector<double>{ 2, 2 }));
    EXPECT_EQ(mean_pool(two, { false, true }).raw(), (std::vector<double>{ 3, 3 }));
    EXPECT_THROW(mean_pool(two, { false, false }), empty_input_error);
}

class Gradcheck : public ::testing::TestWithParam<std::size_t> {};

TEST_P(Gradcheck, TwentyRandomInstances) {
    const auto checks = test::all_gradchecks();
    const auto &c = checks[GetParam()];
    rng r{ 1000 + GetParam() };
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        worst = std::max(worst, c.run(r).max_rel_error);
    }
    EXPECT_LT(worst, 1e-4) << c.name;
}

INSTANTIATE_TEST_SUITE_P(Layers, Gradcheck, ::testing::Range<std::size_t>(0, 8), [](const auto &info) { return test::all_gradchecks()[info.param].name; });

TEST(AdamW, HandComputedStep) {
    parameter p{ "theta", { 1 } };
    p.value[0] = 1.0;
    p.grad[0] = 1.0;
    adamw_step({ &p }, { 1e-3, 0.9, 0.999, 1e-8, 0.01 });
    EXPECT_NEAR(p.value[0], 1.0 - 1e-3 / (1.0 + 1e-8) - 1e-3 * 0.01, 1e-12);
    EXPECT_NEAR(p.value[0], 0.99899, 1e-9);
    EXPECT_EQ(p.step, 1u);
}

TEST(AdamW, ZeroGradNoDecayIsNoop) {
    parameter p{ "theta", { 3 } };
    p.value = tensor{ { 3 }, { 0.5, -2.0, 7.0 } };
    adamw_step({ &p }, { 1e-2, 0.9, 0.999, 1e-8, 0.0 });
    EXPECT_EQ(p.value.raw(), (std::vector<double>{ 0.5, -2.0, 7.0 }));
}

TEST(AdamW, DescendsOnQuadratic) {
    parameter p{ "theta", { 1 } };
    p.value[0] = 1.0;
    double prev = 1.0;
    for (int t = 0; t < 10; ++t) {
        p.grad[0] = 2.0 * p.value[0];
        adamw_step({ &p }, { 1e-2, 0.9, 0.999, 1e-8, 0.01 });
        EXPECT_LT(std::abs(p.value[0]), prev);
        prev = std::abs(p.value[0]);
    }
}

TEST(Checkpoint, RoundTripIsExact) {
    rng r{ 21 };
    linear a{ 5, 3, "a" };
    a.init(r);
    const auto bytes = encode_checkpoint({ { "kind", "test" }, { "seed", "21" } }, a.parameters());
    EXPECT_EQ(bytes.substr(0, 4), "SBCK");
    const auto ck = decode_checkpoint(bytes);
    EXPECT_EQ(ck.header.at("kind"), "test");
    linear b{ 5, 3, "a" };
    load_parameters(ck, b.parameters());
    EXPECT_EQ(b.weight().value.raw(), a.weight().value.raw());
    EXPECT_EQ(b.bias().value.raw(), a.bias().value.raw());
    EXPECT_EQ(encode_checkpoint({ { "kind", "test" }, { "seed", "21" } }, b.parameters()), bytes);
}

TEST(Checkpoint, FileRoundTrip) {
    const auto path = (std::filesystem::temp_directory_path() / "speechbio_ck_test.sbck").string();
    rng r{ 22 };
    linear a{ 2, 2, "a" };
    a.init(r);
    const auto bytes = encode_checkpoint({}, a.parameters());
    write_file(path, bytes);
    EXPECT_EQ(read_file(path), bytes);
}

TEST(Checkpoint, CorruptionDetected) {
    rng r{ 23 };
    linear a{ 2, 2, "a" };
    a.init(r);
    auto bytes = encode_checkpoint({}, a.parameters());
    EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), format_error);
    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(decode_checkpoint(bad), format_error);
    linear wrong{ 3, 2, "a" };
    EXPECT_THROW(load_parameters(decode_checkpoint(bytes), wrong.parameters()), format_error);
}
