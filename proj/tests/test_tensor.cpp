#include <doctest.h>

#include <cmath>

#include "nixforge/conv.hpp"
#include "nixforge/error.hpp"
#include "nixforge/ops.hpp"
#include "nixforge/rng.hpp"
#include "nixforge/runtime.hpp"
#include "oracles.hpp"

using namespace nixforge;
using oracles::random_tensor;

namespace {

Conv1dSpec dense_spec(int in, int out, int k, SplitMix64& rng, int stride = 1,
                      int dilation = 1, int padding = 0, bool bias = true) {
    Conv1dSpec s;
    s.in_channels = in;
    s.out_channels = out;
    s.kernel_size = k;
    s.stride = stride;
    s.dilation = dilation;
    s.padding = padding;
    s.weight = random_tensor({out, in, k}, rng);
    if (bias) s.bias = random_tensor({out}, rng);
    return s;
}

} // namespace

TEST_CASE("conv1d identity kernel") {
    int c = 3, t = 5;
    Conv1dSpec s;
    s.in_channels = c;
    s.out_channels = c;
    s.kernel_size = 1;
    s.weight = Tensor({c, c, 1});
    for (int i = 0; i < c; ++i) s.weight(i, i, 0) = 1.0f;
    s.bias = Tensor({c});
    SplitMix64 rng(11);
    Tensor x = random_tensor({1, c, t}, rng);
    CHECK(conv1d(x, s) == x);
}

TEST_CASE("conv1d hand-expanded case") {
    Conv1dSpec s;
    s.in_channels = 1;
    s.out_channels = 1;
    s.kernel_size = 2;
    s.weight = Tensor({1, 1, 2}, {1.0f, 1.0f});
    Tensor x({1, 1, 3}, {1.0f, 2.0f, 3.0f});
    Tensor y = conv1d(x, s);
    REQUIRE(y.dim(2) == 2);
    CHECK(y(0, 0, 0) == 3.0f);
    CHECK(y(0, 0, 1) == 5.0f);
}

TEST_CASE("conv1d same-padding length preservation") {
    SplitMix64 rng(3);
    Conv1dSpec s = dense_spec(2, 2, 3, rng, 1, 2, same_padding(3, 2));
    CHECK(s.padding == 2);
    Tensor x = random_tensor({1, 2, 9}, rng);
    CHECK(conv1d(x, s).dim(2) == 9);
}

TEST_CASE("conv1d matches the naive oracle over random shapes") {
    SplitMix64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        int c_in = 1 + static_cast<int>(rng.below(8));
        int c_out = 1 + static_cast<int>(rng.below(8));
        int k = 1 + static_cast<int>(rng.below(5));
        int dil = 1 + static_cast<int>(rng.below(4));
        int stride = 1 + static_cast<int>(rng.below(3));
        int pad = static_cast<int>(rng.below(4));
        int t = 1 + static_cast<int>(rng.below(8));
        Conv1dSpec s = dense_spec(c_in, c_out, k, rng, stride, dil, pad);
        if (conv1d_output_length(t, s) <= 0) continue;
        int batch = 1 + static_cast<int>(rng.below(2));
        Tensor x = random_tensor({batch, c_in, t}, rng);
        CHECK(oracles::max_rel_error(conv1d(x, s), oracles::conv1d_naive(x, s)) <
              1e-5);
    }
}

TEST_CASE("depthwise separable identity: center delta + identity mix") {
    int c = 4, t = 7, k = 3;
    Conv1dSpec s;
    s.in_channels = c;
    s.out_channels = c;
    s.kernel_size = k;
    s.padding = same_padding(k, 1);
    s.separable = true;
    s.weight = Tensor({c, 1, k});
    for (int i = 0; i < c; ++i) s.weight(i, 0, k / 2) = 1.0f;
    s.pointwise_weight = Tensor({c, c, 1});
    for (int i = 0; i < c; ++i) s.pointwise_weight(i, i, 0) = 1.0f;
    SplitMix64 rng(5);
    Tensor x = random_tensor({1, c, t}, rng);
    CHECK(depthwise_separable_conv1d(x, s) == x);
}

TEST_CASE("depthwise separable equals explicit two-stage composition") {
    SplitMix64 rng(19);
    Conv1dSpec s;
    s.in_channels = 2;
    s.out_channels = 3;
    s.kernel_size = 3;
    s.padding = 1;
    s.separable = true;
    s.weight = random_tensor({2, 1, 3}, rng);
    s.bias = random_tensor({2}, rng);
    s.pointwise_weight = random_tensor({3, 2, 1}, rng);
    s.pointwise_bias = random_tensor({3}, rng);
    Tensor x = random_tensor({1, 2, 6}, rng);

    // depthwise stage as per-channel conv1d calls
    Tensor mid({1, 2, 6});
    for (int c = 0; c < 2; ++c) {
        Conv1dSpec one;
        one.in_channels = 1;
        one.out_channels = 1;
        one.kernel_size = 3;
        one.padding = 1;
        one.weight = Tensor({1, 1, 3}, {s.weight(c, 0, 0), s.weight(c, 0, 1),
                                        s.weight(c, 0, 2)});
        one.bias = Tensor({1}, {s.bias(c)});
        Tensor xc({1, 1, 6});
        for (int t = 0; t < 6; ++t) xc(0, 0, t) = x(0, c, t);
        Tensor yc = conv1d(xc, one);
        for (int t = 0; t < 6; ++t) mid(0, c, t) = yc(0, 0, t);
    }
    Conv1dSpec pw;
    pw.in_channels = 2;
    pw.out_channels = 3;
    pw.kernel_size = 1;
    pw.weight = s.pointwise_weight;
    pw.bias = s.pointwise_bias;
    Tensor composed = conv1d(mid, pw);

    CHECK(depthwise_separable_conv1d(x, s) == composed);
}

TEST_CASE("transposed conv1d basics") {
    SUBCASE("identity") {
        Conv1dSpec s;
        s.in_channels = 1;
        s.out_channels = 1;
        s.kernel_size = 1;
        s.weight = Tensor({1, 1, 1}, {1.0f});
        Tensor x({1, 1, 4}, {1, 2, 3, 4});
        CHECK(transposed_conv1d(x, s) == x);
    }
    SUBCASE("output length formula") {
        Conv1dSpec s;
        s.in_channels = 1;
        s.out_channels = 1;
        s.kernel_size = 16;
        s.stride = 8;
        s.padding = 4;
        s.weight = Tensor({1, 1, 16});
        CHECK(transposed_conv1d_output_length(5, s) == 40);
    }
    SUBCASE("scatter-add hand case") {
        Conv1dSpec s;
        s.in_channels = 1;
        s.out_channels = 1;
        s.kernel_size = 2;
        s.stride = 2;
        s.weight = Tensor({1, 1, 2}, {1.0f, 1.0f});
        Tensor x({1, 1, 2}, {1.0f, 2.0f});
        Tensor y = transposed_conv1d(x, s);
        REQUIRE(y.dim(2) == 4);
        CHECK(y(0, 0, 0) == 1.0f);
        CHECK(y(0, 0, 1) == 1.0f);
        CHECK(y(0, 0, 2) == 2.0f);
        CHECK(y(0, 0, 3) == 2.0f);
    }
}

TEST_CASE("transposed conv1d matches the scatter-add oracle") {
    SplitMix64 rng(77);
    for (int trial = 0; trial < 150; ++trial) {
        int c_in = 1 + static_cast<int>(rng.below(5));
        int c_out = 1 + static_cast<int>(rng.below(5));
        int k = 1 + static_cast<int>(rng.below(5));
        int stride = 1 + static_cast<int>(rng.below(4));
        int dil = 1 + static_cast<int>(rng.below(3));
        int pad = static_cast<int>(rng.below(3));
        int t = 1 + static_cast<int>(rng.below(7));
        Conv1dSpec s;
        s.in_channels = c_in;
        s.out_channels = c_out;
        s.kernel_size = k;
        s.stride = stride;
        s.dilation = dil;
        s.padding = pad;
        s.weight = random_tensor({c_in, c_out, k}, rng);
        s.bias = random_tensor({c_out}, rng);
        if (transposed_conv1d_output_length(t, s) <= 0) continue;
        Tensor x = random_tensor({1, c_in, t}, rng);
        CHECK(oracles::max_rel_error(transposed_conv1d(x, s),
                                     oracles::transposed_conv1d_naive(x, s)) <
              1e-5);
    }
}

TEST_CASE("conv / transposed-conv adjointness") {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        int c_in = 1 + static_cast<int>(rng.below(4));
        int c_out = 1 + static_cast<int>(rng.below(4));
        int k = 1 + static_cast<int>(rng.below(5));
        int stride = 1 + static_cast<int>(rng.below(3));
        int dil = 1 + static_cast<int>(rng.below(2));
        int pad = static_cast<int>(rng.below(3));
        int t = 4 + static_cast<int>(rng.below(6));
        Conv1dSpec fwd = dense_spec(c_in, c_out, k, rng, stride, dil, pad, false);
        // exact adjointness needs the stride to tile the usable span, else
        // the tail of x is outside the transposed map's codomain
        int span = dil * (k - 1) + 1;
        int usable = t + 2 * pad - span;
        if (usable < 0) continue;
        t -= usable % stride;
        if (conv1d_output_length(t, fwd) <= 0) continue;
        Tensor x = random_tensor({1, c_in, t}, rng);
        Tensor y_shape = conv1d(x, fwd);
        Tensor y = random_tensor(y_shape.dims(), rng);

        // same weight buffer read as [in=c_out, out=c_in, K]
        Conv1dSpec back;
        back.in_channels = c_out;
        back.out_channels = c_in;
        back.kernel_size = k;
        back.stride = stride;
        back.dilation = dil;
        back.padding = pad;
        back.weight = fwd.weight;
        Tensor xt = transposed_conv1d(y, back);

        // transposed output covers t plus any overhang; inner product over
        // the first t samples (conv never read past them when lengths agree)
        double lhs = 0.0;
        for (size_t i = 0; i < y.size(); ++i) lhs += double(y.at(i)) * y_shape.at(i);
        double rhs = 0.0;
        for (int ic = 0; ic < c_in; ++ic)
            for (int tt = 0; tt < t && tt < xt.dim(2); ++tt)
                rhs += static_cast<double>(x(0, ic, tt)) * xt(0, ic, tt);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-4));
    }
}

TEST_CASE("activations") {
    Tensor x({3}, {0.0f, -1.0f, 2.0f});
    Tensor s = silu(x);
    CHECK(s(0) == 0.0f);
    CHECK(s(2) == doctest::Approx(2.0 / (1.0 + std::exp(-2.0))));
    Tensor l = leaky_relu(x, 0.1f);
    CHECK(l(1) == doctest::Approx(-0.1f));
    CHECK(l(2) == 2.0f);
}

TEST_CASE("softmax rows") {
    SUBCASE("equal logits give uniform") {
        Tensor x({2, 4});
        Tensor p = softmax(x, 1);
        for (size_t i = 0; i < p.size(); ++i)
            CHECK(p.at(i) == doctest::Approx(0.25).epsilon(1e-6));
    }
    SUBCASE("rows sum to one and shift invariance") {
        SplitMix64 rng(4);
        Tensor x = random_tensor({3, 5}, rng, -3.0, 3.0);
        Tensor shifted = x;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 5; ++j) shifted(i, j) += 7.5f;
        Tensor p = softmax(x, 1);
        Tensor q = softmax(shifted, 1);
        for (int i = 0; i < 3; ++i) {
            double sum = 0.0;
            for (int j = 0; j < 5; ++j) sum += p(i, j);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
            for (int j = 0; j < 5; ++j)
                CHECK(p(i, j) == doctest::Approx(q(i, j)).epsilon(1e-5));
        }
    }
    SUBCASE("max-shifted form stays finite on huge logits") {
        Tensor x({1, 3}, {1000.0f, 999.0f, 998.0f});
        Tensor p = softmax(x, 1);
        CHECK(p.all_finite());
        CHECK(p(0, 0) > p(0, 1));
    }
}

TEST_CASE("layer_norm normalizes to zero mean unit variance") {
    Tensor x({3}, {1.0f, 2.0f, 3.0f});
    Tensor y = layer_norm(x, {}, {}, 1e-12);
    double mean = (y(0) + y(1) + y(2)) / 3.0;
    double var = 0.0;
    for (int i = 0; i < 3; ++i) var += (y(i) - mean) * (y(i) - mean);
    var /= 3.0;
    CHECK(std::fabs(mean) < 1e-6);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("positional encoding") {
    Tensor pe = positional_encoding(4, 6);
    CHECK(pe(0, 0) == 0.0f);
    CHECK(pe(0, 1) == 1.0f);
    CHECK(pe(1, 0) == doctest::Approx(std::sin(1.0)).epsilon(1e-6));
    for (float v : pe.values()) {
        CHECK(v <= 1.0f);
        CHECK(v >= -1.0f);
    }
    CHECK_THROWS_AS(positional_encoding(4, 5), ConfigError);
}

TEST_CASE("shape errors carry both shapes") {
    SplitMix64 rng(8);
    Conv1dSpec s = dense_spec(3, 2, 3, rng);
    Tensor x = random_tensor({1, 4, 6}, rng);
    try {
        conv1d(x, s);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        std::string msg = e.what();
        CHECK(msg.find("[1 x 4 x 6]") != std::string::npos);
        CHECK(msg.find("[2 x 3 x 3]") != std::string::npos);
    }
}

TEST_CASE("parallel kernels are bit-identical to sequential") {
    SplitMix64 rng(123);
    Conv1dSpec s = dense_spec(6, 8, 5, rng, 1, 2, 4);
    Tensor x = random_tensor({3, 6, 500}, rng);
    Conv1dSpec pw = dense_spec(8, 8, 1, rng);

    set_num_threads(1);
    Tensor a = conv1d(x, s);
    Tensor a2 = conv1d(a, pw);
    set_num_threads(4);
    Tensor b = conv1d(x, s);
    Tensor b2 = conv1d(b, pw);
    set_num_threads(1);

    CHECK(a == b);
    CHECK(a2 == b2);
}
