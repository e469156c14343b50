#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hantext/model.hpp"
#include "hantext/train.hpp"

using namespace hantext;

namespace {

std::vector<ChannelSpec> tiny_specs(int n_channels, std::size_t vocab = 20,
                                    std::size_t dim = 4, std::size_t maps = 3) {
    std::vector<ChannelSpec> specs;
    const Channel order[3] = {Channel::Pinyin, Channel::Character, Channel::Word};
    for (int i = 0; i < n_channels; ++i) {
        ChannelSpec s;
        s.channel = order[i];
        s.vocab_size = vocab;
        s.embed_dim = dim;
        s.window_sizes = {2, 3};
        s.feature_maps = maps;
        specs.push_back(s);
    }
    return specs;
}

std::vector<std::vector<std::size_t>> random_input(const ModelParams& params, std::size_t len, Rng& rng) {
    std::vector<std::vector<std::size_t>> input;
    for (const auto& ch : params.channels) {
        std::vector<std::size_t> ids;
        for (std::size_t i = 0; i < len; ++i)
            ids.push_back(2 + rng.next_index(ch.spec.vocab_size - 2));
        input.push_back(std::move(ids));
    }
    return input;
}

// max relative error between analytic and central-difference gradients
double gradient_check(ModelParams& params, const std::vector<std::vector<std::size_t>>& input,
                      int label, const std::vector<double>* mask = nullptr) {
    ForwardTrace trace;
    forward(input, params, mask, &trace);
    const ModelParams analytic = backward(trace, params, label);

    constexpr double eps = 1e-5;
    double worst = 0.0;
    auto plist = params.param_list();
    auto glist = analytic.param_list();
    for (std::size_t pi = 0; pi < plist.size(); ++pi) {
        Matrix& p = *plist[pi];
        const Matrix& g = *glist[pi];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double saved = p.raw()[i];
            p.raw()[i] = saved + eps;
            const double up = cross_entropy(forward(input, params, mask), label);
            p.raw()[i] = saved - eps;
            const double down = cross_entropy(forward(input, params, mask), label);
            p.raw()[i] = saved;
            const double fd = (up - down) / (2.0 * eps);
            const double denom = std::max({1.0, std::fabs(fd), std::fabs(g.raw()[i])});
            worst = std::max(worst, std::fabs(fd - g.raw()[i]) / denom);
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("embed basics") {
    Rng rng(1);
    Matrix emb = uniform_init(5, 3, -0.1, 0.1, rng);
    for (std::size_t c = 0; c < 3; ++c) emb(kPadId, c) = 0.0;

    Matrix pad = embed({kPadId}, emb);
    for (std::size_t c = 0; c < 3; ++c) CHECK(pad(0, c) == 0.0);

    Matrix twice = embed({2, 2}, emb);
    for (std::size_t c = 0; c < 3; ++c) CHECK(twice(0, c) == twice(1, c));

    // gather oracle
    Rng ridx(7);
    std::vector<std::size_t> ids;
    for (int i = 0; i < 10; ++i) ids.push_back(ridx.next_index(5));
    Matrix out = embed(ids, emb);
    for (std::size_t r = 0; r < ids.size(); ++r)
        for (std::size_t c = 0; c < 3; ++c)
            CHECK(out(r, c) == emb(ids[r], c));

    CHECK_THROWS_AS(embed({99}, emb), std::out_of_range);
}

TEST_CASE("conv_1d hand example and zero case") {
    ConvFilter f;
    f.window = 2;
    f.weights = Matrix(1, 4, 1.0);  // all-ones filter, w=2 d=2
    f.bias = Matrix(1, 1, 0.0);

    Matrix x(3, 2);
    x(0, 0) = 1; x(0, 1) = 0;
    x(1, 0) = 0; x(1, 1) = 1;
    x(2, 0) = 1; x(2, 1) = 1;
    Matrix out = conv_1d(x, f);
    REQUIRE(out.rows() == 2);
    CHECK(out(0, 0) == 2.0);
    CHECK(out(1, 0) == 3.0);

    Matrix zeros(4, 2);
    Matrix z = conv_1d(zeros, f);
    for (double v : z.raw()) CHECK(v == 0.0);
}

TEST_CASE("conv_1d matches brute-force oracle") {
    Rng rng(17);
    const std::size_t len = 7, d = 3, w = 3, maps = 4;
    Matrix x = uniform_init(len, d, -1, 1, rng);
    ConvFilter f;
    f.window = w;
    f.weights = uniform_init(maps, w * d, -1, 1, rng);
    f.bias = uniform_init(1, maps, -1, 1, rng);

    Matrix out = conv_1d(x, f);
    for (std::size_t p = 0; p + w <= len; ++p)
        for (std::size_t m = 0; m < maps; ++m) {
            double acc = f.bias(0, m);
            for (std::size_t j = 0; j < w; ++j)
                for (std::size_t k = 0; k < d; ++k)
                    acc += x(p + j, k) * f.weights(m, j * d + k);
            CHECK(std::fabs(out(p, m) - acc) < 1e-10);
        }
}

TEST_CASE("global_max_pool") {
    Matrix single(1, 3);
    single(0, 0) = 1; single(0, 1) = -2; single(0, 2) = 0.5;
    auto [v, a] = global_max_pool(single);
    CHECK(v == std::vector<double>{1, -2, 0.5});
    CHECK(a == std::vector<std::size_t>{0, 0, 0});

    CHECK_THROWS_AS(global_max_pool(Matrix()), std::invalid_argument);
}

TEST_CASE("pooled output is invariant to row permutations") {
    Rng rng(23);
    Matrix a = uniform_init(6, 4, -1, 1, rng);
    Matrix reversed(6, 4);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 4; ++j) reversed(i, j) = a(5 - i, j);
    CHECK(global_max_pool(a).first == global_max_pool(reversed).first);
}

TEST_CASE("forward concatenation widths") {
    Rng rng(31);
    {
        std::vector<ChannelSpec> specs;
        for (Channel ch : {Channel::Pinyin, Channel::Character, Channel::Word}) {
            ChannelSpec s;
            s.channel = ch;
            s.vocab_size = 10;
            s.embed_dim = 8;
            s.window_sizes = {2, 3, 4};
            s.feature_maps = 256;
            specs.push_back(s);
        }
        ModelParams p = ModelParams::init(specs, 3, rng);
        CHECK(p.concat_width() == 2304);
    }
    {
        ChannelSpec s;
        s.channel = Channel::Word;
        s.vocab_size = 10;
        s.embed_dim = 8;
        s.window_sizes = {2, 3, 4};
        s.feature_maps = 256;
        ModelParams p = ModelParams::init({s}, 3, rng);
        CHECK(p.concat_width() == 768);
    }
}

TEST_CASE("zero dense weights give uniform probabilities") {
    Rng rng(37);
    ModelParams p = ModelParams::init(tiny_specs(2), 3, rng);
    p.out_w.fill(0.0);
    p.out_b.fill(0.0);
    auto input = random_input(p, 6, rng);
    auto probs = forward(input, p);
    for (double v : probs) CHECK(v == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("output is a probability simplex point") {
    Rng rng(41);
    ModelParams p = ModelParams::init(tiny_specs(3), 3, rng);
    for (int it = 0; it < 10; ++it) {
        auto input = random_input(p, 1 + rng.next_index(10), rng);
        auto probs = forward(input, p);
        double sum = 0.0;
        for (double v : probs) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("channel ablation leaves remaining pooled vectors unchanged") {
    Rng rng(43);
    ModelParams both = ModelParams::init(tiny_specs(2), 3, rng);
    auto input = random_input(both, 5, rng);

    ForwardTrace two_trace;
    forward(input, both, nullptr, &two_trace);

    // model with only the second channel, parameters copied over
    ModelParams solo = both;
    solo.channels.erase(solo.channels.begin());
    Rng r2(1);
    solo.out_w = uniform_init(solo.concat_width(), 3, -0.05, 0.05, r2);
    ForwardTrace solo_trace;
    forward({input[1]}, solo, nullptr, &solo_trace);

    const std::size_t first_width = both.channels[0].spec.pooled_width();
    REQUIRE(solo_trace.concat.size() + first_width == two_trace.concat.size());
    for (std::size_t i = 0; i < solo_trace.concat.size(); ++i)
        CHECK(solo_trace.concat[i] == two_trace.concat[first_width + i]);
}

TEST_CASE("backward at a perfect prediction has zero output-layer gradient") {
    Rng rng(47);
    ModelParams p = ModelParams::init(tiny_specs(1), 3, rng);
    auto input = random_input(p, 5, rng);
    ForwardTrace trace;
    forward(input, p, nullptr, &trace);
    const int label = 1;
    trace.probs = {0.0, 1.0, 0.0};  // force the optimum
    ModelParams g = backward(trace, p, label);
    for (double v : g.out_b.raw()) CHECK(v == 0.0);
}

TEST_CASE("backward requires a trace and a valid label") {
    Rng rng(53);
    ModelParams p = ModelParams::init(tiny_specs(1), 3, rng);
    ForwardTrace empty;
    CHECK_THROWS_AS(backward(empty, p, 0), std::invalid_argument);

    auto input = random_input(p, 4, rng);
    ForwardTrace trace;
    forward(input, p, nullptr, &trace);
    CHECK_THROWS_AS(backward(trace, p, 5), std::out_of_range);
}

TEST_CASE("gradient check, single channel") {
    Rng rng(61);
    ModelParams p = ModelParams::init(tiny_specs(1), 3, rng);
    auto input = random_input(p, 6, rng);
    CHECK(gradient_check(p, input, 2) < 1e-4);
}

TEST_CASE("gradient check, full three-channel tiny model") {
    Rng rng(67);
    ModelParams p = ModelParams::init(tiny_specs(3), 3, rng);
    auto input = random_input(p, 5, rng);
    CHECK(gradient_check(p, input, 0) < 1e-4);
}

TEST_CASE("gradient check with hidden layer and tanh") {
    Rng rng(71);
    ModelParams p = ModelParams::init(tiny_specs(2), 3, rng, 5, Activation::Tanh);
    auto input = random_input(p, 5, rng);
    CHECK(gradient_check(p, input, 1) < 1e-4);
}

TEST_CASE("gradient check with a fixed dropout mask") {
    Rng rng(73);
    ModelParams p = ModelParams::init(tiny_specs(1), 3, rng);
    auto input = random_input(p, 6, rng);
    std::vector<double> mask = dropout_mask(p.concat_width(), 0.5, rng);
    CHECK(gradient_check(p, input, 2, &mask) < 1e-4);
}

TEST_CASE("PAD row gradient is zero") {
    Rng rng(79);
    ModelParams p = ModelParams::init(tiny_specs(1), 3, rng);
    std::vector<std::vector<std::size_t>> input = {{2, kPadId, 3, kPadId}};
    ForwardTrace trace;
    forward(input, p, nullptr, &trace);
    ModelParams g = backward(trace, p, 0);
    for (std::size_t c = 0; c < p.channels[0].spec.embed_dim; ++c)
        CHECK(g.channels[0].embedding(kPadId, c) == 0.0);
}

TEST_CASE("short sequences are PAD-extended to the largest window") {
    Rng rng(83);
    ModelParams p = ModelParams::init(tiny_specs(1), 3, rng);  // windows {2,3}
    auto probs = forward({{2}}, p);  // length 1 < max window 3
    CHECK(probs.size() == 3);
    double sum = probs[0] + probs[1] + probs[2];
    CHECK(std::fabs(sum - 1.0) < 1e-12);
}

TEST_CASE("forward rejects inconsistent shapes") {
    Rng rng(89);
    ModelParams p = ModelParams::init(tiny_specs(2), 3, rng);
    CHECK_THROWS_AS(forward({{2, 3}}, p), std::invalid_argument);  // one input, two channels
    std::vector<double> bad_mask(3, 1.0);
    CHECK_THROWS_AS(forward({{2, 3}, {2, 3}}, p, &bad_mask), std::invalid_argument);
}
