#include <doctest.h>

#include <numeric>

#include "hnmvts/adam.hpp"
#include "hnmvts/autodiff.hpp"
#include "hnmvts/error.hpp"
#include "hnmvts/gradcheck.hpp"
#include "hnmvts/kernels.hpp"
#include "hnmvts/linalg.hpp"
#include "hnmvts/rng.hpp"

#include "oracles.hpp"

using namespace hnmvts;

TEST_SUITE("tensor") {
    TEST_CASE("shape, indexing and reshape") {
        Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
        CHECK(t.size() == 6);
        CHECK(t.at({1, 2}) == 6);
        CHECK(t.reshaped({3, 2}).at({2, 0}) == 5);
        CHECK_THROWS_AS(t.reshaped({4, 2}), DimensionError);
        CHECK_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), DimensionError);
        CHECK(Tensor({0, 3}).size() == 0);
        CHECK(Tensor::identity(3).at({1, 1}) == 1);
        CHECK(Tensor::identity(3).at({1, 2}) == 0);
    }

    TEST_CASE("all_finite") {
        Tensor t({2}, {1, 2});
        CHECK(t.all_finite());
        t[1] = std::nan("");
        CHECK_FALSE(t.all_finite());
    }
}

TEST_SUITE("rng") {
    TEST_CASE("same seed gives identical draws; different seeds and streams differ") {
        Rng a(7), b(7), c(8), d(7, 1);
        const auto ta = a.normal_tensor({64});
        CHECK(ta == b.normal_tensor({64}));
        CHECK_FALSE(ta == c.normal_tensor({64}));
        CHECK_FALSE(ta == d.normal_tensor({64}));
        CHECK(set_seed(7).next_u64() == Rng(7).next_u64());
    }

    TEST_CASE("uniform moments and bounded integers") {
        Rng r(3);
        double s = 0, s2 = 0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double u = r.uniform();
            REQUIRE(u >= 0.0);
            REQUIRE(u < 1.0);
            s += u;
            s2 += u * u;
        }
        CHECK(s / n == doctest::Approx(0.5).epsilon(0.01));
        CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(1.0 / 12).epsilon(0.02));
        for (int i = 0; i < 1000; ++i) CHECK(r.below(7) < 7);
    }

    TEST_CASE("normal moments") {
        Rng r(11);
        const Tensor t = r.normal_tensor({100000});
        double s = 0, s2 = 0;
        for (Real v : t.data()) {
            s += v;
            s2 += v * v;
        }
        CHECK(std::abs(s / 1e5) < 0.02);
        CHECK(s2 / 1e5 == doctest::Approx(1.0).epsilon(0.02));
    }

    TEST_CASE("shuffle is a permutation and deterministic") {
        std::vector<int> a(50), b;
        std::iota(a.begin(), a.end(), 0);
        b = a;
        Rng(5).shuffle(std::span<int>(a));
        Rng(5).shuffle(std::span<int>(b));
        CHECK(a == b);
        std::vector<int> sorted = a;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
    }
}

TEST_SUITE("kernels") {
    TEST_CASE("gemm variants match the triple-loop oracle, parallel and reference alike") {
        Rng rng(1);
        for (auto [m, k, n] : {std::tuple{4, 5, 3}, std::tuple{1, 1, 1}, std::tuple{37, 129, 65}, std::tuple{300, 200, 150}}) {
            const Tensor a = oracle::random(rng, {std::size_t(m), std::size_t(k)});
            const Tensor b = oracle::random(rng, {std::size_t(k), std::size_t(n)});
            const Tensor want = oracle::matmul(a, b);
            const Tensor at = oracle::transpose(a), bt = oracle::transpose(b);
            Tensor c1({std::size_t(m), std::size_t(n)}), c2 = c1, c3 = c1, c4 = c1, c5 = c1, c6 = c1;
            kernels::gemm_nn(m, k, n, a.ptr(), b.ptr(), c1.ptr());
            kernels::reference::gemm_nn(m, k, n, a.ptr(), b.ptr(), c2.ptr());
            kernels::gemm_nt(m, k, n, a.ptr(), bt.ptr(), c3.ptr());
            kernels::reference::gemm_nt(m, k, n, a.ptr(), bt.ptr(), c4.ptr());
            kernels::gemm_tn(m, k, n, at.ptr(), b.ptr(), c5.ptr());
            kernels::reference::gemm_tn(m, k, n, at.ptr(), b.ptr(), c6.ptr());
            for (const Tensor* c : {&c1, &c2, &c3, &c4, &c5, &c6}) CHECK(max_abs_diff(*c, want) < 1e-12);
        }
    }

    TEST_CASE("gemm accumulates into its output") {
        Tensor a({1, 1}, {2}), b({1, 1}, {3}), c({1, 1}, {1});
        kernels::gemm_nn(1, 1, 1, a.ptr(), b.ptr(), c.ptr());
        CHECK(c[0] == 7);
    }

    TEST_CASE("channel linear kernels agree with the oracle and with the reference") {
        Rng rng(2);
        for (std::size_t wc : {std::size_t(1), std::size_t(5)}) {
            kernels::ChannelLinearDims d{7, 5, 4, 6, wc};
            const Tensor h = oracle::random(rng, {7, 5, 6});
            const Tensor w = oracle::random(rng, {wc, 4, 6});
            const Tensor dy = oracle::random(rng, {7, 5, 4});
            Tensor y1({7, 5, 4}), y2 = y1;
            kernels::channel_linear(d, h.ptr(), w.ptr(), y1.ptr());
            kernels::reference::channel_linear(d, h.ptr(), w.ptr(), y2.ptr());
            CHECK(max_abs_diff(y1, oracle::channel_linear(h, w)) < 1e-12);
            CHECK(max_abs_diff(y1, y2) < 1e-12);

            // Adjoint identities: <dy, W h> = <W^T dy, h> = <dW, W> pairing.
            Tensor dh1({7, 5, 6}), dh2 = dh1, dw1({wc, 4, 6}), dw2 = dw1;
            kernels::channel_linear_grad_input(d, dy.ptr(), w.ptr(), dh1.ptr());
            kernels::reference::channel_linear_grad_input(d, dy.ptr(), w.ptr(), dh2.ptr());
            kernels::channel_linear_grad_weight(d, dy.ptr(), h.ptr(), dw1.ptr());
            kernels::reference::channel_linear_grad_weight(d, dy.ptr(), h.ptr(), dw2.ptr());
            CHECK(max_abs_diff(dh1, dh2) < 1e-12);
            CHECK(max_abs_diff(dw1, dw2) < 1e-12);
            double lhs = 0, rhs_h = 0, rhs_w = 0;
            for (std::size_t i = 0; i < y1.size(); ++i) lhs += y1[i] * dy[i];
            for (std::size_t i = 0; i < h.size(); ++i) rhs_h += h[i] * dh1[i];
            for (std::size_t i = 0; i < w.size(); ++i) rhs_w += w[i] * dw1[i];
            CHECK(lhs == doctest::Approx(rhs_h).epsilon(1e-12));
            CHECK(lhs == doctest::Approx(rhs_w).epsilon(1e-12));
        }
    }

    TEST_CASE("moving average matches explicit padding, and its gradient is the adjoint") {
        Rng rng(3);
        for (std::size_t kernel : {1, 3, 5, 25}) {
            const std::size_t rows = 4, len = 30;
            const Tensor x = oracle::random(rng, {rows, len});
            Tensor y({rows, len}), yr = y;
            kernels::moving_average(rows, len, kernel, x.ptr(), y.ptr());
            kernels::reference::moving_average(rows, len, kernel, x.ptr(), yr.ptr());
            CHECK(max_abs_diff(y, yr) < 1e-12);
            for (std::size_t r = 0; r < rows; ++r) {
                std::vector<double> row(x.ptr() + r * len, x.ptr() + (r + 1) * len);
                const auto want = oracle::moving_average(row, kernel);
                for (std::size_t t = 0; t < len; ++t) CHECK(std::abs(y[r * len + t] - want[t]) < 1e-12);
            }
            const Tensor dy = oracle::random(rng, {rows, len});
            Tensor dx({rows, len}), dxr = dx;
            kernels::moving_average_grad(rows, len, kernel, dy.ptr(), dx.ptr());
            kernels::reference::moving_average_grad(rows, len, kernel, dy.ptr(), dxr.ptr());
            CHECK(max_abs_diff(dx, dxr) < 1e-12);
            double lhs = 0, rhs = 0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                lhs += y[i] * dy[i];
                rhs += x[i] * dx[i];
            }
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_SUITE("autodiff") {
    TEST_CASE("matmul examples") {
        Tape tape;
        Rng rng(4);
        const Tensor b = oracle::random(rng, {3, 2});
        CHECK(matmul(tape.constant(Tensor::identity(3)), tape.constant(b)).value() == b);
        CHECK(matmul(tape.constant(Tensor({1, 1}, {2})), tape.constant(Tensor({1, 1}, {3}))).value()[0] == 6);
        const Tensor a = oracle::random(rng, {4, 5}), c = oracle::random(rng, {5, 3});
        CHECK(max_abs_diff(matmul(tape.constant(a), tape.constant(c)).value(), oracle::matmul(a, c)) < 1e-12);
    }

    TEST_CASE("matmul shape mismatch names both shapes") {
        Tape tape;
        try {
            matmul(tape.constant(Tensor({2, 3})), tape.constant(Tensor({4, 2})));
            FAIL("expected DimensionError");
        } catch (const DimensionError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("[2x3]") != std::string::npos);
            CHECK(msg.find("[4x2]") != std::string::npos);
        }
    }

    TEST_CASE("matmul is associative") {
        Rng rng(5);
        for (int trial = 0; trial < 10; ++trial) {
            Tape tape;
            Var a = tape.constant(oracle::random(rng, {6, 4})), b = tape.constant(oracle::random(rng, {4, 7})),
                c = tape.constant(oracle::random(rng, {7, 3}));
            CHECK(max_abs_diff(matmul(matmul(a, b), c).value(), matmul(a, matmul(b, c)).value()) < 1e-9);
        }
    }

    TEST_CASE("backward examples") {
        {
            Tape tape;
            Var x = tape.variable(Tensor({5}, {1, -2, 3, 0.5, 7}));
            tape.backward(sum(x));
            CHECK(tape.grad(x) == Tensor::ones({5}));
        }
        {
            Tape tape;
            const Tensor xv({4}, {1, -2, 3, 0.5});
            Var x = tape.variable(xv);
            tape.backward(scale(sum(square(x)), 0.5));
            CHECK(max_abs_diff(tape.grad(x), xv) < 1e-15);
        }
        {
            Tape tape;
            Var x = tape.variable(Tensor({3}));
            CHECK_THROWS_AS(tape.backward(x), ContractError);
        }
        {
            Tape tape;
            Var x = tape.variable(Tensor({2}, {1, 2}));
            Var unused = tape.variable(Tensor({3}, {1, 2, 3}));
            tape.backward(sum(x));
            CHECK(tape.grad(unused) == Tensor::zeros({3}));
        }
    }

    TEST_CASE("random 2-layer MLP loss matches finite differences") {
        Rng rng(6);
        const Tensor x = oracle::random(rng, {5, 4});
        const Tensor y = oracle::random(rng, {5, 3});
        TapeFunction f = [&](Tape& tape, std::span<const Var> in) {
            Var h = relu(linear(tape.constant(x), in[0], in[1]));
            Var out = linear(h, in[2], in[3]);
            return mean(square(sub(out, tape.constant(y))));
        };
        const std::vector<Tensor> point{oracle::random(rng, {6, 4}), oracle::random(rng, {6}), oracle::random(rng, {3, 6}),
                                        oracle::random(rng, {3})};
        CHECK(finite_diff_check(f, point).max_relative_error < 1e-4);
    }

    TEST_CASE("every primitive passes the finite-difference check") {
        Rng rng(7);
        const Tensor w3 = oracle::random(rng, {2, 3, 5});
        const auto weighted = [&](Tape& tape, const Var& v) {
            // Random linear functional so the gradient is not constant.
            Tensor c(v.shape());
            Rng r(99);
            for (auto& e : c.data()) e = static_cast<Real>(r.uniform(-1, 1));
            return sum(mul(v, tape.constant(c)));
        };
        std::vector<std::pair<const char*, TapeFunction>> cases{
            {"add/sub/mul", [&](Tape& t, std::span<const Var> in) { return weighted(t, mul(add(in[0], in[1]), sub(in[0], in[1]))); }},
            {"scale/add_scalar", [&](Tape& t, std::span<const Var> in) { return weighted(t, add_scalar(scale(in[0], 2.5), 1.0)); }},
            {"sqrt", [&](Tape& t, std::span<const Var> in) { return weighted(t, sqrt(add_scalar(square(in[0]), 0.5))); }},
            {"relu", [&](Tape& t, std::span<const Var> in) { return weighted(t, relu(in[0])); }},
            {"mean", [&](Tape&, std::span<const Var> in) { return scale(mean(mul(in[0], in[1])), 3.0); }},
            {"row ops", [&](Tape& t, std::span<const Var> in) {
                 Var r = row_mean(in[0]);
                 Var s = add_scalar(row_mean(square(in[1])), 0.3);
                 Var d = add_scalar(row_mean(square(in[0])), 0.7);
                 return weighted(t, row_div(row_mul(row_add(row_sub(in[0], r), square(r)), s), d));
             }},
            {"moving_average", [&](Tape& t, std::span<const Var> in) { return weighted(t, moving_average(in[0], 3)); }},
            {"reshape/transpose", [&](Tape& t, std::span<const Var> in) {
                 return weighted(t, transpose(reshape(in[0], {5, 6})));
             }},
            {"slice/concat", [&](Tape& t, std::span<const Var> in) {
                 std::vector<Var> parts{slice(in[1], 1, 3), slice(in[0], 0, 2)};
                 return weighted(t, concat(parts));
             }},
            {"channel_linear", [&](Tape& t, std::span<const Var> in) {
                 return weighted(t, channel_linear(reshape(in[0], {3, 2, 5}), t.constant(w3)));
             }},
            {"matmul", [&](Tape& t, std::span<const Var> in) { return weighted(t, matmul(in[0], transpose(in[1]))); }},
        };
        const std::vector<Tensor> point{oracle::random(rng, {6, 5}), oracle::random(rng, {6, 5})};
        for (const auto& [name, f] : cases) {
            INFO(std::string(name));
            CHECK(finite_diff_check(f, point).max_relative_error < 1e-6);
        }
    }

    TEST_CASE("channel_linear gradient reaches both shared and per-channel weights") {
        Rng rng(8);
        for (std::size_t wc : {std::size_t(1), std::size_t(3)}) {
            TapeFunction f = [](Tape&, std::span<const Var> in) { return sum(square(channel_linear(in[0], in[1]))); };
            const std::vector<Tensor> point{oracle::random(rng, {2, 3, 4}), oracle::random(rng, {wc, 5, 4})};
            CHECK(finite_diff_check(f, point).max_relative_error < 1e-6);
        }
    }
}

TEST_SUITE("gradcheck") {
    TEST_CASE("linear function has essentially zero error") {
        TapeFunction f = [](Tape& t, std::span<const Var> in) {
            return sum(mul(in[0], t.constant(Tensor({3}, {1.5, -2, 0.25}))));
        };
        const std::vector<Tensor> point{Tensor({3}, {0.3, 0.1, -0.7})};
        CHECK(finite_diff_check(f, point).max_relative_error < 1e-10);
    }

    TEST_CASE("cubic at x=2 matches 3x^2") {
        TapeFunction f = [](Tape&, std::span<const Var> in) { return sum(mul(square(in[0]), in[0])); };
        const std::vector<Tensor> point{Tensor({1}, {2.0})};
        CHECK(finite_diff_check(f, point).max_relative_error < 1e-6);
        CHECK(gradients(f, point)[0][0] == doctest::Approx(12.0).epsilon(1e-14));
    }
}

TEST_SUITE("adam") {
    TEST_CASE("zero gradient leaves parameters unchanged") {
        Parameter p{"w", Tensor({3}, {1, 2, 3})};
        AdamState st;
        std::vector<Parameter*> ps{&p};
        std::vector<Tensor> g{Tensor({3})};
        for (int i = 0; i < 5; ++i) adam_step(ps, g, st);
        CHECK(p.value == Tensor({3}, {1, 2, 3}));
    }

    TEST_CASE("first step on g=1 matches the hand-rolled oracle") {
        Parameter p{"w", Tensor::scalar(0.5)};
        AdamState st;
        std::vector<Parameter*> ps{&p};
        std::vector<Tensor> g{Tensor::scalar(1.0)};
        adam_step(ps, g, st);
        const auto want = oracle::adam({0.5, 0, 0}, 1.0, 1);
        CHECK(p.value[0] == want.p);
        CHECK(p.value[0] - 0.5 == doctest::Approx(-1e-4).epsilon(1e-6));
    }

    TEST_CASE("many steps agree with the oracle bit-for-bit in double") {
        Parameter p{"w", Tensor::scalar(0.3)};
        AdamState st;
        st.options.lr = 0.01;
        std::vector<Parameter*> ps{&p};
        oracle::AdamScalar o{0.3, 0, 0};
        Rng rng(9);
        for (std::uint64_t t = 1; t <= 50; ++t) {
            const double g = rng.uniform(-2, 2);
            std::vector<Tensor> gs{Tensor::scalar(static_cast<Real>(g))};
            adam_step(ps, gs, st);
            o = oracle::adam(o, g, t, 0.01);
            CHECK(p.value[0] == doctest::Approx(o.p).epsilon(1e-14));
        }
    }

    TEST_CASE("descends x^2 monotonically in |x|") {
        Parameter p{"x", Tensor::scalar(1.0)};
        AdamState st;
        st.options.lr = 0.01;
        std::vector<Parameter*> ps{&p};
        double prev = 1.0;
        for (int i = 0; i < 100; ++i) {
            std::vector<Tensor> g{Tensor::scalar(2 * p.value[0])};
            adam_step(ps, g, st);
            CHECK(std::abs(p.value[0]) < prev);
            prev = std::abs(p.value[0]);
        }
    }

    TEST_CASE("non-finite gradient names the parameter; frozen parameters are skipped") {
        Parameter p{"decoder.weight", Tensor::scalar(1.0)};
        Parameter frozen{"frozen", Tensor::scalar(2.0), false};
        AdamState st;
        std::vector<Parameter*> ps{&p, &frozen};
        std::vector<Tensor> ok{Tensor::scalar(1.0), Tensor::scalar(1.0)};
        adam_step(ps, ok, st);
        CHECK(frozen.value[0] == 2.0);
        std::vector<Tensor> bad{Tensor::scalar(std::numeric_limits<Real>::infinity()), Tensor::scalar(1.0)};
        try {
            adam_step(ps, bad, st);
            FAIL("expected NumericError");
        } catch (const NumericError& e) {
            CHECK(std::string(e.what()).find("decoder.weight") != std::string::npos);
        }
    }

    TEST_CASE("deterministic") {
        Rng rng(10);
        const Tensor init = oracle::random(rng, {4, 4});
        const Tensor grad = oracle::random(rng, {4, 4});
        Parameter a{"a", init}, b{"a", init};
        AdamState sa, sb;
        std::vector<Parameter*> pa{&a}, pb{&b};
        std::vector<Tensor> g{grad};
        for (int i = 0; i < 3; ++i) {
            adam_step(pa, g, sa);
            adam_step(pb, g, sb);
        }
        CHECK(a.value == b.value);
        CHECK(sa.m[0] == sb.m[0]);
        CHECK(sa.v[0] == sb.v[0]);
    }
}

TEST_SUITE("linalg") {
    TEST_CASE("symmetric eigen reconstructs the matrix; vectors orthonormal and sign-fixed") {
        Rng rng(11);
        for (std::size_t p : {1, 2, 5, 12}) {
            Tensor a = oracle::random(rng, {p, p});
            for (std::size_t i = 0; i < p; ++i)
                for (std::size_t j = 0; j < i; ++j) a.at({i, j}) = a.at({j, i});
            const SymmetricEigen e = symmetric_eigen(a);
            for (std::size_t j = 1; j < p; ++j) CHECK(e.values[j - 1] >= e.values[j]);
            Tensor lam({p, p});
            for (std::size_t j = 0; j < p; ++j) lam.at({j, j}) = e.values[j];
            const Tensor rec = oracle::matmul(oracle::matmul(e.vectors, lam), oracle::transpose(e.vectors));
            CHECK(max_abs_diff(rec, a) < 1e-9);
            CHECK(max_abs_diff(oracle::matmul(oracle::transpose(e.vectors), e.vectors), Tensor::identity(p)) < 1e-9);
            for (std::size_t j = 0; j < p; ++j) {
                std::size_t best = 0;
                for (std::size_t i = 0; i < p; ++i)
                    if (std::abs(e.vectors.at({i, j})) > std::abs(e.vectors.at({best, j})) + 1e-12) best = i;
                CHECK(e.vectors.at({best, j}) > 0);
            }
        }
    }

    TEST_CASE("pca with d = p preserves pairwise distances of centered rows") {
        Rng rng(12);
        const Tensor rows = oracle::random(rng, {6, 4});
        const Tensor z = pca_project(rows, 4);
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j) {
                double dr = 0, dz = 0;
                for (std::size_t q = 0; q < 4; ++q) {
                    dr += std::pow(rows.at({i, q}) - rows.at({j, q}), 2);
                    dz += std::pow(z.at({i, q}) - z.at({j, q}), 2);
                }
                CHECK(std::abs(std::sqrt(dr) - std::sqrt(dz)) < 1e-9);
            }
    }

    TEST_CASE("identical rows project identically") {
        Tensor rows({3, 3}, {1, 2, 3, 1, 2, 3, -1, 0, 4});
        const Tensor z = pca_project(rows, 2);
        CHECK(z.at({0, 0}) == z.at({1, 0}));
        CHECK(z.at({0, 1}) == z.at({1, 1}));
    }

    TEST_CASE("5x5 symmetric input is reconstructed from all components") {
        Rng rng(13);
        Tensor a = oracle::random(rng, {5, 5});
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < i; ++j) a.at({i, j}) = a.at({j, i});
        const PcaResult r = pca(a, 5);
        Tensor rec = oracle::matmul(r.projected, oracle::transpose(r.components));
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) rec.at({i, j}) += r.mean[j];
        CHECK(max_abs_diff(rec, a) < 1e-9);
    }

    TEST_CASE("rank-deficient input is fine; d out of range is a contract error") {
        Tensor rows({4, 3}, {1, 2, 3, 2, 4, 6, 3, 6, 9, 4, 8, 12});
        const PcaResult r = pca(rows, 3);
        CHECK(std::abs(r.eigenvalues[1]) < 1e-9);
        // Rank 1: the first component alone reconstructs the centered data.
        Tensor rec = oracle::matmul(pca(rows, 1).projected, oracle::transpose(pca(rows, 1).components));
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(rec.at({i, j}) + r.mean[j] - rows.at({i, j})) < 1e-9);
        CHECK_THROWS_AS(pca(rows, 0), ContractError);
        CHECK_THROWS_AS(pca(rows, 4), ContractError);
    }
}
