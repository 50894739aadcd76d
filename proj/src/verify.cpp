#include "trs/verify.hpp"

#include <cmath>

namespace trs {

namespace {

constexpr double kTol = 1e-10;

template <class T>
DenseTensor<T> rand_tensor(const Shape& sh, rng::Rng& r) {
    DenseTensor<T> X{sh};
    for (Index k = 0; k < X.size(); ++k) {
        if constexpr (std::is_same_v<T, cplx>) {
            const double re = r.normal();
            const double im = r.normal();
            X[k] = cplx(re, im);
        } else {
            X[k] = r.normal();
        }
    }
    return X;
}

template <class T>
Mat<T> rand_mat(Index rows, Index cols, rng::Rng& r) {
    Mat<T> M(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) {
            if constexpr (std::is_same_v<T, cplx>) {
                const double re = r.normal();
                const double im = r.normal();
                M(i, j) = cplx(re, im);
            } else {
                M(i, j) = r.normal();
            }
        }
    return M;
}

template <class T>
TRCores<T> rand_cores(const std::vector<Index>& dims, const std::vector<Index>& ranks,
                      rng::Rng& r) {
    const Index N = static_cast<Index>(dims.size());
    std::vector<DenseTensor<T>> cores;
    cores.reserve(static_cast<std::size_t>(N));
    for (Index n = 0; n < N; ++n)
        cores.push_back(rand_tensor<T>(
            Shape({ranks[static_cast<std::size_t>(n)],
                   dims[static_cast<std::size_t>(n)],
                   ranks[static_cast<std::size_t>((n + 1) % N)]}),
            r));
    return TRCores<T>(std::move(cores));
}

template <class T>
double tensor_diff(const DenseTensor<T>& A, const DenseTensor<T>& B) {
    if (A.shape() != B.shape()) return std::numeric_limits<double>::infinity();
    double m = 0;
    for (Index k = 0; k < A.size(); ++k) m = std::max(m, std::abs(A[k] - B[k]));
    return m;
}

template <class T>
double mat_diff(const Mat<T>& A, const Mat<T>& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        return std::numeric_limits<double>::infinity();
    if (A.size() == 0) return 0;
    return (A - B).cwiseAbs().maxCoeff();
}

Matz dft_matrix(Index n) {
    Matz F(n, n);
    const double base = -2.0 * M_PI / static_cast<double>(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Index j = 0; j < n; ++j)
        for (Index k = 0; k < n; ++k)
            F(j, k) = std::polar(scale, base * static_cast<double>(j * k));
    return F;
}

DenseTensor<cplx> complexify(const DenseTensor<double>& X) {
    DenseTensor<cplx> Y{X.shape()};
    for (Index k = 0; k < X.size(); ++k) Y[k] = cplx(X[k], 0.0);
    return Y;
}

std::vector<Index> rand_dims(rng::Rng& r, Index order, Index lo, Index hi) {
    std::vector<Index> dims(static_cast<std::size_t>(order));
    for (auto& d : dims) d = r.uniform_int(lo, hi);
    return dims;
}

// (A x2 Am) boxtimes (B x2 Bm) = (A boxtimes B) x2 (Bm kron Am), checked for
// real and complex scalars.
template <class T>
double product_exchange_once(rng::Rng& r) {
    const Index I1 = r.uniform_int(1, 3), J1 = r.uniform_int(1, 4), K = r.uniform_int(1, 3);
    const Index J2 = r.uniform_int(1, 4), I2 = r.uniform_int(1, 3);
    const Index M1 = r.uniform_int(1, 4), M2 = r.uniform_int(1, 4);
    const auto A = rand_tensor<T>(Shape({I1, J1, K}), r);
    const auto B = rand_tensor<T>(Shape({K, J2, I2}), r);
    const auto Am = rand_mat<T>(M1, J1, r);
    const auto Bm = rand_mat<T>(M2, J2, r);
    const auto lhs = subchain_product(mode_n_product(A, Am, 2), mode_n_product(B, Bm, 2));
    const auto rhs = mode_n_product(subchain_product(A, B), kronecker(Bm, Am), 2);
    return tensor_diff(lhs, rhs);
}

CheckResult check_product_exchange(std::uint64_t seed, int instances) {
    rng::Rng r(seed);
    CheckResult res{"subchain product exchanges with mode-2 matrix products", instances, 0, false};
    for (int t = 0; t < instances; ++t)
        res.max_err = std::max(res.max_err, t % 2 == 0 ? product_exchange_once<double>(r)
                                                       : product_exchange_once<cplx>(r));
    res.pass = res.max_err <= kTol;
    return res;
}

// slices_hadamard(A x2 Am, B x2 Bm) = (A boxtimes B) x2 khatri_rao(Bm^T, Am^T)^T.
template <class T>
double matched_product_once(rng::Rng& r) {
    const Index I1 = r.uniform_int(1, 3), J1 = r.uniform_int(1, 4), K = r.uniform_int(1, 3);
    const Index J2 = r.uniform_int(1, 4), I2 = r.uniform_int(1, 3);
    const Index M = r.uniform_int(1, 5);
    const auto A = rand_tensor<T>(Shape({I1, J1, K}), r);
    const auto B = rand_tensor<T>(Shape({K, J2, I2}), r);
    const auto Am = rand_mat<T>(M, J1, r);
    const auto Bm = rand_mat<T>(M, J2, r);
    const auto lhs = slices_hadamard(mode_n_product(A, Am, 2), mode_n_product(B, Bm, 2));
    const Mat<T> AmT = Am.transpose();
    const Mat<T> BmT = Bm.transpose();
    const Mat<T> kr = khatri_rao(BmT, AmT).transpose();
    const auto rhs = mode_n_product(subchain_product(A, B), kr, 2);
    return tensor_diff(lhs, rhs);
}

CheckResult check_matched_product(std::uint64_t seed, int instances) {
    rng::Rng r(seed);
    CheckResult res{"slice products exchange with matched mode-2 products", instances, 0, false};
    for (int t = 0; t < instances; ++t)
        res.max_err = std::max(res.max_err, t % 2 == 0 ? matched_product_once<double>(r)
                                                       : matched_product_once<cplx>(r));
    res.pass = res.max_err <= kTol;
    return res;
}

CheckResult check_fft_countsketch(std::uint64_t seed, int instances) {
    rng::Rng r(seed);
    CheckResult res{"fft-domain sketch equals dense combined countsketch", instances, 0, false};
    for (int t = 0; t < instances; ++t) {
        const Index N = r.uniform_int(3, 4);
        const auto dims = rand_dims(r, N, 1, 4);
        const auto ranks = rand_dims(r, N, 1, 3);
        const auto cores = rand_cores<double>(dims, ranks, r);
        const Shape shape(dims);
        const Index m = r.uniform_int(1, 7);
        const Index skip = r.uniform_int(1, N);
        const TensorSketchOp op(shape, m, rng::sub_seed(seed, 91, static_cast<std::uint64_t>(t)));
        const DenseTensor<double> got = tensorsketch_subchain(cores, op, skip);
        const auto order = modes_skipping(N, skip);
        std::vector<Index> odims;
        for (Index mode : order) odims.push_back(shape.dim(mode));
        const Shape osh(odims);
        Matd T_dense = Matd::Zero(m, osh.size());
        for (Index c = 1; c <= osh.size(); ++c) {
            const MultiIndex others = delinearize(c, osh);
            T_dense(op.combined_bucket(skip, others) - 1, c - 1) += op.combined_sign(skip, others);
        }
        const DenseTensor<double> want = mode_n_product(subchain_tensor(cores, skip), T_dense, 2);
        res.max_err = std::max(res.max_err, tensor_diff(got, want));
    }
    res.pass = res.max_err <= kTol;
    return res;
}

CheckResult check_subchain_definition(std::uint64_t seed, int instances) {
    rng::Rng r(seed);
    CheckResult res{"merged subchain equals per-index slice products", instances, 0, false};
    for (int t = 0; t < instances; ++t) {
        const Index N = r.uniform_int(2, 4);
        const auto dims = rand_dims(r, N, 1, 4);
        const auto ranks = rand_dims(r, N, 1, 3);
        const auto cores = rand_cores<double>(dims, ranks, r);
        const Index skip = r.uniform_int(1, N);
        const DenseTensor<double> sub = subchain_tensor(cores, skip);
        const auto order = modes_skipping(N, skip);
        std::vector<Index> odims;
        for (Index mode : order) odims.push_back(dims[static_cast<std::size_t>(mode - 1)]);
        const Shape osh(odims);
        double err = 0;
        for (Index j = 1; j <= osh.size(); ++j) {
            const MultiIndex oi = delinearize(j, osh);
            Matd acc = lateral_slice(cores.core(order[0]), oi[0]);
            for (std::size_t k = 1; k < order.size(); ++k)
                acc = (acc * lateral_slice(cores.core(order[k]), oi[k])).eval();
            const Matd got = lateral_slice(sub, j);
            err = std::max(err, mat_diff(got, acc));
        }
        res.max_err = std::max(res.max_err, err);
    }
    res.pass = res.max_err <= kTol;
    return res;
}

CheckResult check_fourier_factorization(std::uint64_t seed, int instances) {
    rng::Rng r(seed);
    CheckResult res{"fourier sketch factorizes over modes", instances, 0, false};
    for (int t = 0; t < instances; ++t) {
        const Index N = r.uniform_int(3, 4);
        const auto dims = rand_dims(r, N, 2, 4);
        const auto ranks = rand_dims(r, N, 1, 3);
        const Shape shape(dims);
        const auto cores = rand_cores<double>(dims, ranks, r);
        const DenseTensor<double> X = rand_tensor<double>(shape, r);
        std::vector<ModeMixer> mixers;
        for (Index j = 1; j <= N; ++j)
            mixers.emplace_back(shape.dim(j),
                                rng::sub_seed(seed, 92, static_cast<std::uint64_t>(t),
                                              static_cast<std::uint64_t>(j)));
        const Index skip = r.uniform_int(1, N);
        const Index m = r.uniform_int(1, 7);
        UniformSampler smp(rng::sub_seed(seed, 93, static_cast<std::uint64_t>(t)));
        const IndexTable idxs = smp.draw(shape, skip, m);

        std::vector<DenseTensor<cplx>> mixed0;
        for (Index n = 1; n <= N; ++n)
            mixed0.push_back(mix_core(cores.core(n), mixers[static_cast<std::size_t>(n - 1)]));
        const TRCores<cplx> mixed(std::move(mixed0));
        const Matz got = subchain_design(sampled_subchain(mixed, skip, idxs));

        const auto order = modes_skipping(N, skip);
        const auto fd = [&](Index j) {
            const auto& signs = mixers[static_cast<std::size_t>(j - 1)].signs().signs();
            const Eigen::Map<const Vecd> d(signs.data(), static_cast<Index>(signs.size()));
            return Matz(dft_matrix(shape.dim(j)) * d.asDiagonal());
        };
        Matz chain = fd(order[0]);
        for (std::size_t k = 1; k < order.size(); ++k)
            chain = kronecker(fd(order[k]), chain).eval();
        std::vector<DenseTensor<cplx>> cc;
        for (Index n = 1; n <= N; ++n) cc.push_back(complexify(cores.core(n)));
        const TRCores<cplx> cores_c(std::move(cc));
        const Matz full =
            subchain_design(mode_n_product(subchain_tensor(cores_c, skip), chain, 2));
        Matz want(m, full.cols());
        for (Index j = 0; j < m; ++j) want.row(j) = full.row(idxs.joint(shape, j) - 1);
        res.max_err = std::max(res.max_err, mat_diff(got, want));

        // sampled right-hand side with the per-row inverse transform
        const DenseTensor<cplx> Xhat = mix_tensor(X, mixers);
        const Matz B = ksrft_sketch_rhs(Xhat, skip, idxs, &mixers[static_cast<std::size_t>(skip - 1)]);
        const Matz Xu = unfold(Xhat, skip, UnfoldKind::wrapped).transpose();
        const auto& ssk = mixers[static_cast<std::size_t>(skip - 1)].signs().signs();
        const Eigen::Map<const Vecd> dn(ssk.data(), static_cast<Index>(ssk.size()));
        const Matz Un = dn.asDiagonal() * dft_matrix(shape.dim(skip)).adjoint();
        Matz Bwant(m, shape.dim(skip));
        for (Index j = 0; j < m; ++j)
            Bwant.row(j) = (Un * Xu.row(idxs.joint(shape, j) - 1).transpose()).transpose();
        res.max_err = std::max(res.max_err, mat_diff(B, Bwant));
    }
    res.pass = res.max_err <= kTol;
    return res;
}

CheckResult check_unfolding_exchange(std::uint64_t seed, int instances) {
    rng::Rng r(seed);
    CheckResult res{"unfoldings of multi-mode products split into kronecker chains", instances, 0,
                    false};
    for (int t = 0; t < instances; ++t) {
        const Index N = r.uniform_int(3, 4);
        const auto dims = rand_dims(r, N, 1, 4);
        const Shape shape(dims);
        const DenseTensor<double> X = rand_tensor<double>(shape, r);
        std::vector<Matd> U;
        std::vector<Index> mdims;
        for (Index j = 1; j <= N; ++j) {
            const Index rows = r.uniform_int(1, 4);
            U.push_back(rand_mat<double>(rows, shape.dim(j), r));
            mdims.push_back(rows);
        }
        DenseTensor<double> Xt = X;
        for (Index j = 1; j <= N; ++j)
            Xt = mode_n_product(Xt, U[static_cast<std::size_t>(j - 1)], j);
        const Index n = r.uniform_int(1, N);
        const auto chain_over = [&](const std::vector<Index>& modes) {
            Matd acc = U[static_cast<std::size_t>(modes[0] - 1)];
            for (std::size_t k = 1; k < modes.size(); ++k)
                acc = kronecker(U[static_cast<std::size_t>(modes[k] - 1)], acc).eval();
            return acc;
        };
        const Matd wrapped_chain = chain_over(modes_skipping(N, n));
        const Matd lhs_w = unfold(Xt, n, UnfoldKind::wrapped);
        const Matd rhs_w = U[static_cast<std::size_t>(n - 1)] *
                           unfold(X, n, UnfoldKind::wrapped) * wrapped_chain.transpose();
        res.max_err = std::max(res.max_err, mat_diff(lhs_w, rhs_w));
        std::vector<Index> classical_modes;
        for (Index j = 1; j <= N; ++j)
            if (j != n) classical_modes.push_back(j);
        const Matd classical_chain = chain_over(classical_modes);
        const Matd lhs_c = unfold(Xt, n, UnfoldKind::classical);
        const Matd rhs_c = U[static_cast<std::size_t>(n - 1)] *
                           unfold(X, n, UnfoldKind::classical) * classical_chain.transpose();
        res.max_err = std::max(res.max_err, mat_diff(lhs_c, rhs_c));
    }
    res.pass = res.max_err <= kTol;
    return res;
}

CheckResult check_hash_combination(std::uint64_t seed, int instances) {
    rng::Rng r(seed);
    CheckResult res{"combined hash obeys modular-sum and sign-product laws", instances, 0, false};
    double violations = 0;
    for (int t = 0; t < instances; ++t) {
        const Index N = r.uniform_int(2, 4);
        const auto dims = rand_dims(r, N, 1, 6);
        const Shape shape(dims);
        const Index m = r.uniform_int(1, 7);
        const std::uint64_t s = rng::sub_seed(seed, 94, static_cast<std::uint64_t>(t));
        const TensorSketchOp op(shape, m, s);
        const TensorSketchOp op2(shape, m, s);
        const Index skip = r.uniform_int(1, N);
        const auto order = modes_skipping(N, skip);
        for (int probe = 0; probe < 20; ++probe) {
            MultiIndex others;
            Index hsum = 0;
            double sprod = 1;
            for (Index mode : order) {
                const Index i = r.uniform_int(1, shape.dim(mode));
                others.push_back(i);
                const Index h = op.bucket(mode, i);
                const double sg = op.sign(mode, i);
                if (h < 1 || h > m) violations += 1;
                if (sg != 1.0 && sg != -1.0) violations += 1;
                if (h != op2.bucket(mode, i) || sg != op2.sign(mode, i)) violations += 1;
                hsum += h - 1;
                sprod *= sg;
            }
            if (op.combined_bucket(skip, others) != hsum % m + 1) violations += 1;
            if (op.combined_sign(skip, others) != sprod) violations += 1;
        }
        const TensorSketchOp inj = TensorSketchOp::injective(shape, skip);
        std::vector<Index> odims;
        for (Index mode : order) odims.push_back(shape.dim(mode));
        const Shape osh(odims);
        for (Index c = 1; c <= osh.size(); ++c) {
            const MultiIndex oi = delinearize(c, osh);
            if (inj.combined_bucket(skip, oi) != c) violations += 1;
            if (inj.combined_sign(skip, oi) != 1.0) violations += 1;
        }
    }
    res.max_err = violations;
    res.pass = violations == 0;
    return res;
}

}  // namespace

std::vector<CheckResult> run_verification(std::uint64_t seed) {
    std::vector<CheckResult> out;
    out.push_back(check_product_exchange(rng::sub_seed(seed, 81), 50));
    out.push_back(check_matched_product(rng::sub_seed(seed, 82), 50));
    out.push_back(check_fft_countsketch(rng::sub_seed(seed, 83), 50));
    out.push_back(check_subchain_definition(rng::sub_seed(seed, 84), 25));
    out.push_back(check_fourier_factorization(rng::sub_seed(seed, 85), 25));
    out.push_back(check_unfolding_exchange(rng::sub_seed(seed, 86), 25));
    out.push_back(check_hash_combination(rng::sub_seed(seed, 87), 25));
    return out;
}

}  // namespace trs
