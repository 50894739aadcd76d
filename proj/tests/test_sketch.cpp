#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "trs/fft.hpp"
#include "trs/rng.hpp"
#include "trs/sketch.hpp"

using namespace trs;

namespace {

constexpr double kPi = 3.14159265358979323846;

Matz dense_dft(Index n) {
    Matz F(n, n);
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    for (Index j = 0; j < n; ++j)
        for (Index k = 0; k < n; ++k)
            F(j, k) = std::polar(s, -2.0 * kPi * static_cast<double>(j * k) /
                                        static_cast<double>(n));
    return F;
}

DenseTensor<double> random_tensor(const Shape& sh, std::uint64_t seed) {
    DenseTensor<double> X{sh};
    rng::Rng r(seed);
    for (Index k = 0; k < X.size(); ++k) X[k] = r.normal();
    return X;
}

DenseTensor<double> random_core(Index R1, Index I, Index R2, std::uint64_t seed) {
    return random_tensor(Shape({R1, I, R2}), seed);
}

TRCores<double> random_ring(const std::vector<Index>& dims, const std::vector<Index>& ranks,
                            std::uint64_t seed) {
    std::vector<DenseTensor<double>> cores;
    const std::size_t N = dims.size();
    for (std::size_t n = 0; n < N; ++n)
        cores.push_back(random_core(ranks[n], dims[n], ranks[(n + 1) % N],
                                    seed + 100 * static_cast<std::uint64_t>(n)));
    return TRCores<double>(std::move(cores));
}

/// Dense m x J matrix of the combined CountSketch over modes != skip, built
/// from the per-mode tables with the combination law written out by hand.
Matd dense_combined_sketch(const TensorSketchOp& op, Index skip) {
    const auto order = modes_skipping(op.shape().order(), skip);
    std::vector<Index> jdims;
    for (Index mode : order) jdims.push_back(op.shape().dim(mode));
    const Shape jshape(jdims);
    Matd T = Matd::Zero(op.m(), jshape.size());
    for (Index c = 1; c <= jshape.size(); ++c) {
        const MultiIndex sub = delinearize(c, jshape);
        Index sum = 0;
        double sign = 1.0;
        for (std::size_t k = 0; k < order.size(); ++k) {
            sum += op.bucket(order[k], sub[k]) - 1;
            sign *= op.sign(order[k], sub[k]);
        }
        T(sum % op.m(), c - 1) += sign;
    }
    return T;
}

}  // namespace

TEST_CASE("unitary transform matches the dense kernel and inverts") {
    for (const Index n : {5, 8}) {
        std::vector<cplx> x(static_cast<std::size_t>(n));
        rng::Rng r(static_cast<std::uint64_t>(n));
        for (auto& v : x) {
            const double re = r.normal();
            const double im = r.normal();
            v = cplx(re, im);
        }
        Eigen::Map<const Eigen::VectorXcd> xv(x.data(), n);
        const Eigen::VectorXcd want = dense_dft(n) * xv;
        std::vector<cplx> y = x;
        fft::unitary(y, false);
        for (Index i = 0; i < n; ++i)
            CHECK(std::abs(y[static_cast<std::size_t>(i)] - want(i)) < 1e-12);
        fft::unitary(y, true);
        for (Index i = 0; i < n; ++i)
            CHECK(std::abs(y[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)]) <
                  1e-12);
    }
}

TEST_CASE("sign flips are deterministic with values in pm one") {
    const SignFlip a(64, 9), b(64, 9), c(64, 10);
    bool saw_plus = false, saw_minus = false, differs = false;
    for (Index i = 1; i <= 64; ++i) {
        CHECK(std::abs(a.sign(i)) == 1.0);
        CHECK(a.sign(i) == b.sign(i));
        saw_plus = saw_plus || a.sign(i) > 0;
        saw_minus = saw_minus || a.sign(i) < 0;
        differs = differs || a.sign(i) != c.sign(i);
    }
    CHECK(saw_plus);
    CHECK(saw_minus);
    CHECK(differs);
    CHECK_THROWS_AS(a.sign(0), std::domain_error);
    CHECK_THROWS_AS(SignFlip(0, 1), std::invalid_argument);
}

TEST_CASE("mode mixer applies FD and its inverse exactly") {
    const Index n = 6;
    const ModeMixer mixer(n, 17);
    const Matz F = dense_dft(n);
    Eigen::VectorXcd d(n);
    for (Index i = 1; i <= n; ++i) d(i - 1) = mixer.signs().sign(i);

    std::vector<cplx> x(static_cast<std::size_t>(n));
    rng::Rng r(18);
    for (auto& v : x) {
        const double re = r.normal();
        const double im = r.normal();
        v = cplx(re, im);
    }
    Eigen::Map<const Eigen::VectorXcd> xv(x.data(), n);
    const Eigen::VectorXcd want = F * d.asDiagonal() * xv;

    std::vector<cplx> y = x;
    mixer.mix_fiber(y.data());
    double norm_in = 0, norm_out = 0;
    for (Index i = 0; i < n; ++i) {
        CHECK(std::abs(y[static_cast<std::size_t>(i)] - want(i)) < 1e-12);
        norm_in += std::norm(x[static_cast<std::size_t>(i)]);
        norm_out += std::norm(y[static_cast<std::size_t>(i)]);
    }
    CHECK(norm_out == doctest::Approx(norm_in).epsilon(1e-12));

    mixer.unmix_fiber(y.data());
    for (Index i = 0; i < n; ++i)
        CHECK(std::abs(y[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)]) < 1e-12);
}

TEST_CASE("mixing every mode commutes with ring reconstruction") {
    const TRCores<double> ring = random_ring({3, 4, 2}, {2, 2, 2}, 23);
    std::vector<ModeMixer> mixers;
    for (Index n = 1; n <= 3; ++n) mixers.emplace_back(ring.dims().dim(n), 40 + n);

    const DenseTensor<cplx> lhs = mix_tensor(tr_reconstruct(ring), mixers);

    std::vector<DenseTensor<cplx>> mixed;
    for (Index n = 1; n <= 3; ++n)
        mixed.push_back(mix_core(ring.core(n), mixers[static_cast<std::size_t>(n - 1)]));
    const DenseTensor<cplx> rhs = tr_reconstruct(TRCores<cplx>(std::move(mixed)));

    for (Index k = 0; k < lhs.size(); ++k) CHECK(std::abs(lhs[k] - rhs[k]) < 1e-12);

    const DenseTensor<cplx> back = unmix_tensor(lhs, mixers);
    const DenseTensor<double> X = tr_reconstruct(ring);
    for (Index k = 0; k < X.size(); ++k) {
        CHECK(back[k].real() == doctest::Approx(X[k]).epsilon(1e-12));
        CHECK(std::abs(back[k].imag()) < 1e-12);
    }
}

TEST_CASE("uniform sampler draws valid deterministic tables") {
    const Shape sh({3, 4, 5});
    UniformSampler s1(33), s2(33);
    const IndexTable a = s1.draw(sh, 2, 20);
    const IndexTable b = s2.draw(sh, 2, 20);
    CHECK(a.modes == modes_skipping(3, 2));
    CHECK(a.m() == 20);
    for (std::size_t k = 0; k < a.modes.size(); ++k) {
        const Index d = sh.dim(a.modes[k]);
        for (Index j = 0; j < 20; ++j) {
            CHECK(a.idx[k][static_cast<std::size_t>(j)] >= 1);
            CHECK(a.idx[k][static_cast<std::size_t>(j)] <= d);
            CHECK(a.idx[k][static_cast<std::size_t>(j)] == b.idx[k][static_cast<std::size_t>(j)]);
        }
    }
    CHECK_THROWS_AS(s1.draw(sh, 2, 0), std::invalid_argument);
}

TEST_CASE("exhaustive table walks the joint columns in order") {
    const Shape sh({3, 4, 5});
    for (Index skip = 1; skip <= 3; ++skip) {
        const IndexTable t = UniformSampler::exhaustive(sh, skip);
        CHECK(t.m() == sh.size() / sh.dim(skip));
        for (Index j = 0; j < t.m(); ++j) CHECK(t.joint(sh, j) == j + 1);
    }
}

TEST_CASE("gathered rows are columns of the wrapped unfolding") {
    const Shape sh({3, 4, 2});
    const DenseTensor<double> X = random_tensor(sh, 44);
    UniformSampler s(45);
    for (Index n = 1; n <= 3; ++n) {
        const IndexTable t = s.draw(sh, n, 7);
        const Matd B = gather_unfolding_rows(X, n, t);
        const Matd Xn = unfold(X, n, UnfoldKind::wrapped);
        REQUIRE(B.rows() == 7);
        REQUIRE(B.cols() == sh.dim(n));
        for (Index j = 0; j < 7; ++j)
            CHECK((B.row(j).transpose() - Xn.col(t.joint(sh, j) - 1)).norm() == 0.0);
    }
}

TEST_CASE("polynomial hashes are deterministic and roughly balanced") {
    const KWiseHash h(3, 55), h2(3, 55);
    const KWiseHash s(4, 56);
    std::vector<Index> counts(4, 0);
    Index sign_sum = 0;
    for (Index x = 1; x <= 2000; ++x) {
        CHECK(h.raw(x) < KWiseHash::prime);
        CHECK(h.raw(x) == h2.raw(x));
        const Index b = h.bucket(x, 4);
        REQUIRE(b >= 1);
        REQUIRE(b <= 4);
        ++counts[static_cast<std::size_t>(b - 1)];
        const double sg = s.sign(x);
        CHECK(std::abs(sg) == 1.0);
        sign_sum += sg > 0 ? 1 : -1;
    }
    for (const Index c : counts) {
        CHECK(c > 300);
        CHECK(c < 700);
    }
    CHECK(std::abs(sign_sum) < 300);
    CHECK_THROWS_AS(KWiseHash(1, 5), std::invalid_argument);
}

TEST_CASE("tensor sketch operator combines per-mode hashes") {
    const Shape sh({3, 4, 5});
    const TensorSketchOp op(sh, 7, 66), op2(sh, 7, 66);
    for (Index mode = 1; mode <= 3; ++mode)
        for (Index i = 1; i <= sh.dim(mode); ++i) {
            CHECK(op.bucket(mode, i) >= 1);
            CHECK(op.bucket(mode, i) <= 7);
            CHECK(std::abs(op.sign(mode, i)) == 1.0);
            CHECK(op.bucket(mode, i) == op2.bucket(mode, i));
            CHECK(op.sign(mode, i) == op2.sign(mode, i));
        }
    // combination law, spelled out
    for (Index i3 = 1; i3 <= 5; ++i3)
        for (Index i1 = 1; i1 <= 3; ++i1) {
            const MultiIndex others{i3, i1};  // modes (3, 1) when skipping 2
            const Index want = ((op.bucket(3, i3) - 1) + (op.bucket(1, i1) - 1)) % 7 + 1;
            CHECK(op.combined_bucket(2, others) == want);
            CHECK(op.combined_sign(2, others) == op.sign(3, i3) * op.sign(1, i1));
        }
    CHECK_THROWS_AS(TensorSketchOp(sh, 0, 1), std::invalid_argument);
}

TEST_CASE("injective operator reproduces joint column indices") {
    const Shape sh({3, 4, 5});
    for (Index skip = 1; skip <= 3; ++skip) {
        const TensorSketchOp op = TensorSketchOp::injective(sh, skip);
        CHECK(op.m() == sh.size() / sh.dim(skip));
        const auto order = modes_skipping(3, skip);
        std::vector<Index> jdims;
        for (Index mode : order) jdims.push_back(sh.dim(mode));
        const Shape jshape(jdims);
        for (Index c = 1; c <= jshape.size(); ++c) {
            const MultiIndex sub = delinearize(c, jshape);
            CHECK(op.combined_bucket(skip, sub) == c);
            CHECK(op.combined_sign(skip, sub) == 1.0);
        }
    }
}

TEST_CASE("core countsketch equals the dense sketch of its unfolding") {
    const DenseTensor<double> G = random_core(2, 5, 3, 77);
    const TensorSketchOp op(Shape({5, 4}), 3, 78);
    const DenseTensor<double> S = countsketch_core(G, op, 1);
    REQUIRE(S.shape() == Shape({2, 3, 3}));
    Matd D = Matd::Zero(3, 5);
    for (Index i = 1; i <= 5; ++i) D(op.bucket(1, i) - 1, i - 1) = op.sign(1, i);
    const Matd want = D * core_mode2_unfolding(G);
    CHECK((core_mode2_unfolding(S) - want).norm() == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("sketched subchain equals the dense combined sketch of the design") {
    const TRCores<double> ring = random_ring({3, 4, 2}, {2, 3, 2}, 88);
    const TensorSketchOp op(ring.dims(), 5, 89);
    for (Index n = 1; n <= 3; ++n) {
        const Matd A = subchain_design(subchain_tensor(ring, n));
        const Matd T = dense_combined_sketch(op, n);
        const Matd got = subchain_design(tensorsketch_subchain(ring, op, n));
        CHECK((got - T * A).norm() < 1e-10 * (1.0 + A.norm()));
    }
}

TEST_CASE("sketched right-hand sides agree between dense sparse and brute force") {
    const Shape sh({3, 4, 2});
    SparseTensor Xs{sh};
    rng::Rng r(91);
    for (Index flat = 1; flat <= sh.size(); ++flat)
        if (r.uniform() < 0.5) Xs.insert(delinearize(flat, sh), r.normal());
    REQUIRE(Xs.nnz() > 0);
    const DenseTensor<double> X = Xs.densify();
    const TensorSketchOp op(sh, 5, 92);
    for (Index n = 1; n <= 3; ++n) {
        const Matd dense = tensorsketch_rhs(X, n, op);
        const Matd sparse = tensorsketch_rhs(Xs, n, op);
        CHECK((dense - sparse).norm() == doctest::Approx(0.0).epsilon(1e-13));
        const Matd want = dense_combined_sketch(op, n) * unfold(X, n, UnfoldKind::wrapped).transpose();
        CHECK((dense - want).norm() == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("fourier-sketch right-hand side gathers mixed rows then unmixes") {
    const Shape sh({3, 4, 2});
    const DenseTensor<double> X = random_tensor(sh, 101);
    std::vector<ModeMixer> mixers;
    for (Index n = 1; n <= 3; ++n) mixers.emplace_back(sh.dim(n), 110 + n);
    const DenseTensor<cplx> Xhat = mix_tensor(X, mixers);

    UniformSampler s(103);
    const IndexTable t = s.draw(sh, 2, 6);
    const Matz Mz = unfold(Xhat, 2, UnfoldKind::wrapped);

    const Matz plain = ksrft_sketch_rhs(Xhat, 2, t, nullptr);
    for (Index j = 0; j < 6; ++j)
        CHECK((plain.row(j).transpose() - Mz.col(t.joint(sh, j) - 1)).norm() < 1e-14);

    const Matz unmixed = ksrft_sketch_rhs(Xhat, 2, t, &mixers[1]);
    const Matz F = dense_dft(4);
    Eigen::VectorXcd d(4);
    for (Index i = 1; i <= 4; ++i) d(i - 1) = mixers[1].signs().sign(i);
    const Matz Un = d.asDiagonal() * F.adjoint();
    for (Index j = 0; j < 6; ++j) {
        const Eigen::VectorXcd want = Un * Mz.col(t.joint(sh, j) - 1);
        CHECK((unmixed.row(j).transpose() - want).norm() < 1e-12);
    }
}

TEST_CASE("leverage distributions match hand-computed scores") {
    Matd M1(4, 2);
    M1 << 1, 0, 0, 1, 1, 0, 0, 1;
    const LeverageDistribution d1(M1);
    CHECK(d1.rank() == 2);
    for (Index i = 0; i < 4; ++i)
        CHECK(d1.probabilities()(i) == doctest::Approx(0.25).epsilon(1e-12));

    Matd M2(4, 2);
    M2 << 1, 1, 2, 2, 3, 3, 0, 0;
    const LeverageDistribution d2(M2);
    CHECK(d2.rank() == 1);
    CHECK(d2.probabilities()(0) == doctest::Approx(1.0 / 14).epsilon(1e-10));
    CHECK(d2.probabilities()(1) == doctest::Approx(4.0 / 14).epsilon(1e-10));
    CHECK(d2.probabilities()(2) == doctest::Approx(9.0 / 14).epsilon(1e-10));
    CHECK(d2.probabilities()(3) == doctest::Approx(0.0).epsilon(1e-10));

    CHECK_THROWS_AS(LeverageDistribution(Matd::Zero(3, 2)), std::runtime_error);

    // spike distribution: every draw hits the only supported row
    Matd M3 = Matd::Zero(4, 2);
    M3(2, 0) = 1.0;
    const LeverageDistribution d3(M3);
    rng::Rng rs(7);
    for (int k = 0; k < 20; ++k) CHECK(d3.sample(rs) == 3);

    // draws are deterministic and follow the weights loosely
    rng::Rng ra(8), rb(8);
    Index hits3 = 0;
    for (int k = 0; k < 2000; ++k) {
        const Index v = d2.sample(ra);
        CHECK(v == d2.sample(rb));
        REQUIRE(v >= 1);
        REQUIRE(v <= 3);  // the zero row is never drawn
        if (v == 3) ++hits3;
    }
    CHECK(hits3 > 2000 * (9.0 / 14) - 150);
    CHECK(hits3 < 2000 * (9.0 / 14) + 150);

    const DenseTensor<double> G = random_core(2, 6, 3, 121);
    const LeverageDistribution from_core = leverage_distribution(G);
    const LeverageDistribution direct(core_mode2_unfolding(G));
    CHECK((from_core.probabilities() - direct.probabilities()).norm() < 1e-14);
}

TEST_CASE("joint sampling respects per-mode distributions") {
    const Shape sh({4, 4, 4});
    Matd spike = Matd::Zero(4, 2);
    spike(0, 0) = 1.0;
    const LeverageDistribution d(spike);
    std::vector<const LeverageDistribution*> dists{&d, nullptr, nullptr};
    rng::Rng r(131);
    const IndexTable t = draw_joint_samples(sh, 2, 50, dists, r);
    CHECK(t.modes == std::vector<Index>({3, 1}));
    for (Index j = 0; j < 50; ++j) {
        CHECK(t.idx[1][static_cast<std::size_t>(j)] == 1);  // mode 1, spiked
        CHECK(t.idx[0][static_cast<std::size_t>(j)] >= 1);
        CHECK(t.idx[0][static_cast<std::size_t>(j)] <= 4);
    }
    std::vector<const LeverageDistribution*> bad{&d, nullptr};
    CHECK_THROWS_AS(draw_joint_samples(sh, 2, 5, bad, r), std::invalid_argument);
}

TEST_CASE("embedding size recommendations") {
    using K = SketchKind;
    CHECK(recommend_embedding_size(K::tensorsketch, 1, 1, 2, {6}, 1.0, 1.0) == 6);
    // cap at the total number of rows
    CHECK(recommend_embedding_size(K::tensorsketch, 2, 2, 2, {4}, 0.5, 0.1) == 4);
    CHECK(recommend_embedding_size(K::ksrft, 1, 1, 2, {10}, 1.0, 0.5) == 3);
    // tiny demand still returns at least one row
    CHECK(recommend_embedding_size(K::ksrft, 1, 1, 2, {2}, 100.0, 1.0) == 1);
    // tighter accuracy never shrinks the sketch
    CHECK(recommend_embedding_size(K::tensorsketch, 2, 2, 3, {50, 50}, 0.1, 0.5) >=
          recommend_embedding_size(K::tensorsketch, 2, 2, 3, {50, 50}, 1.0, 0.5));
    CHECK(recommend_embedding_size(K::ksrft, 2, 2, 3, {50, 50}, 0.1, 0.5) >=
          recommend_embedding_size(K::ksrft, 2, 2, 3, {50, 50}, 1.0, 0.5));
    CHECK_THROWS_AS(recommend_embedding_size(K::ksrft, 1, 1, 1, {}, 1.0, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(recommend_embedding_size(K::ksrft, 1, 1, 3, {4}, 1.0, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(recommend_embedding_size(K::ksrft, 1, 1, 2, {4}, 0.0, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(recommend_embedding_size(K::ksrft, 1, 1, 2, {4}, 1.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(recommend_embedding_size(K::ksrft, 1, 1, 2, {4}, 1.0, 1.5),
                    std::invalid_argument);
}

TEST_CASE("sketched least squares lands near the optimum") {
    const Shape sh({20, 20, 20});
    const TRCores<double> ring = random_ring({20, 20, 20}, {3, 3, 3}, 141);
    const DenseTensor<double> X = random_tensor(sh, 142);
    const Index n = 1;
    const Matd A = subchain_design(subchain_tensor(ring, n));
    const Matd Bfull = unfold(X, n, UnfoldKind::wrapped).transpose();
    const Matd Zopt = A.colPivHouseholderQr().solve(Bfull);
    const double opt = (A * Zopt - Bfull).norm();
    REQUIRE(opt > 0);

    // leverage-score row sampling
    {
        std::vector<LeverageDistribution> levs;
        for (Index k = 1; k <= 3; ++k) levs.push_back(leverage_distribution(ring.core(k)));
        std::vector<const LeverageDistribution*> dists{&levs[0], &levs[1], &levs[2]};
        rng::Rng r(143);
        const IndexTable t = draw_joint_samples(sh, n, 200, dists, r);
        const Matd As = subchain_design(sampled_subchain(ring, n, t));
        const Matd Bs = gather_unfolding_rows(X, n, t);
        const Matd Z = As.colPivHouseholderQr().solve(Bs);
        CHECK((A * Z - Bfull).norm() <= 1.5 * opt);
    }

    // fourier mixing with uniform sampling
    {
        std::vector<ModeMixer> mixers;
        for (Index k = 1; k <= 3; ++k) mixers.emplace_back(20, 150 + k);
        std::vector<DenseTensor<cplx>> mixed;
        for (Index k = 1; k <= 3; ++k)
            mixed.push_back(mix_core(ring.core(k), mixers[static_cast<std::size_t>(k - 1)]));
        const TRCores<cplx> ringz(std::move(mixed));
        const DenseTensor<cplx> Xhat = mix_tensor(X, mixers);
        UniformSampler s(144);
        const IndexTable t = s.draw(sh, n, 200);
        const Matz As = subchain_design(sampled_subchain(ringz, n, t));
        const Matz Bs = ksrft_sketch_rhs(Xhat, n, t, &mixers[0]);
        const Matz Zc = As.colPivHouseholderQr().solve(Bs);
        const Matd Z = Zc.real();
        CHECK((A * Z - Bfull).norm() <= 1.5 * opt);
    }

    // tensor sketch
    {
        const TensorSketchOp op(sh, 200, 145);
        const Matd As = subchain_design(tensorsketch_subchain(ring, op, n));
        const Matd Bs = tensorsketch_rhs(X, n, op);
        const Matd Z = As.colPivHouseholderQr().solve(Bs);
        CHECK((A * Z - Bfull).norm() <= 1.5 * opt);
    }
}
