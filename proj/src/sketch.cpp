#include "trs/sketch.hpp"

#include <algorithm>
#include <cmath>

#include "trs/fft.hpp"

namespace trs {

namespace {

DenseTensor<cplx> complexify(const DenseTensor<double>& X) {
    DenseTensor<cplx> Y(X.shape());
    for (Index k = 0; k < X.size(); ++k) Y[k] = X[k];
    return Y;
}

/// Apply fn to every mode-`mode` fiber of X in place; fn sees a contiguous
/// buffer of the fiber.
template <class F>
void transform_mode_fibers(DenseTensor<cplx>& X, Index mode, F&& fn) {
    const auto sp = detail::mode_split(X.shape(), mode);
    std::vector<cplx> buf(static_cast<std::size_t>(sp.mode_size));
    for (Index outer = 0; outer < sp.outer_size; ++outer) {
        const Index base = outer * sp.inner_size * sp.mode_size;
        for (Index inner = 0; inner < sp.inner_size; ++inner) {
            cplx* p = X.data() + base + inner;
            for (Index i = 0; i < sp.mode_size; ++i)
                buf[static_cast<std::size_t>(i)] = p[i * sp.inner_size];
            fn(buf);
            for (Index i = 0; i < sp.mode_size; ++i)
                p[i * sp.inner_size] = buf[static_cast<std::size_t>(i)];
        }
    }
}

}  // namespace

SignFlip::SignFlip(Index n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("SignFlip: size must be positive");
    rng::Rng rng(seed);
    signs_.resize(static_cast<std::size_t>(n));
    for (auto& s : signs_) s = rng.uniform_int(0, 1) ? 1.0 : -1.0;
}

void ModeMixer::mix_fiber(cplx* x) const {
    const Index n = size();
    for (Index i = 0; i < n; ++i) x[i] *= signs_.signs()[static_cast<std::size_t>(i)];
    fft::unitary(x, n, false);
}

void ModeMixer::unmix_fiber(cplx* x) const {
    const Index n = size();
    fft::unitary(x, n, true);
    for (Index i = 0; i < n; ++i) x[i] *= signs_.signs()[static_cast<std::size_t>(i)];
}

namespace {

DenseTensor<cplx> apply_mixer_mode(DenseTensor<cplx> X, Index mode, const ModeMixer& mixer,
                                   bool inverse) {
    if (mixer.size() != X.dim(mode))
        throw std::invalid_argument("mixer size does not match mode extent");
    transform_mode_fibers(X, mode, [&](std::vector<cplx>& buf) {
        if (inverse)
            mixer.unmix_fiber(buf.data());
        else
            mixer.mix_fiber(buf.data());
    });
    return X;
}

}  // namespace

DenseTensor<cplx> mix_core(const DenseTensor<double>& core, const ModeMixer& mixer) {
    return mix_core(complexify(core), mixer);
}

DenseTensor<cplx> mix_core(const DenseTensor<cplx>& core, const ModeMixer& mixer) {
    if (core.order() != 3) throw std::invalid_argument("mix_core: core must be order 3");
    return apply_mixer_mode(core, 2, mixer, false);
}

DenseTensor<cplx> unmix_core(const DenseTensor<cplx>& core, const ModeMixer& mixer) {
    if (core.order() != 3) throw std::invalid_argument("unmix_core: core must be order 3");
    return apply_mixer_mode(core, 2, mixer, true);
}

namespace {

DenseTensor<cplx> mix_all(DenseTensor<cplx> X, const std::vector<ModeMixer>& mixers,
                          bool inverse) {
    if (static_cast<Index>(mixers.size()) != X.order())
        throw std::invalid_argument("mix_tensor: need one mixer per mode");
    for (Index mode = 1; mode <= X.order(); ++mode)
        X = apply_mixer_mode(std::move(X), mode, mixers[static_cast<std::size_t>(mode - 1)],
                             inverse);
    return X;
}

}  // namespace

DenseTensor<cplx> mix_tensor(const DenseTensor<double>& X, const std::vector<ModeMixer>& mixers) {
    return mix_all(complexify(X), mixers, false);
}

DenseTensor<cplx> mix_tensor(const DenseTensor<cplx>& X, const std::vector<ModeMixer>& mixers) {
    return mix_all(X, mixers, false);
}

DenseTensor<cplx> unmix_tensor(const DenseTensor<cplx>& X, const std::vector<ModeMixer>& mixers) {
    return mix_all(X, mixers, true);
}

IndexTable UniformSampler::draw(const Shape& shape, Index skip, Index m) {
    if (m < 1) throw std::invalid_argument("UniformSampler: m must be positive");
    IndexTable t;
    t.modes = modes_skipping(shape.order(), skip);
    t.idx.resize(t.modes.size());
    for (std::size_t k = 0; k < t.modes.size(); ++k) {
        const Index d = shape.dim(t.modes[k]);
        t.idx[k].resize(static_cast<std::size_t>(m));
        for (Index j = 0; j < m; ++j)
            t.idx[k][static_cast<std::size_t>(j)] = rng_.uniform_int(1, d);
    }
    return t;
}

IndexTable UniformSampler::exhaustive(const Shape& shape, Index skip) {
    IndexTable t;
    t.modes = modes_skipping(shape.order(), skip);
    Index m = 1;
    for (Index mode : t.modes) m *= shape.dim(mode);
    t.idx.resize(t.modes.size());
    for (auto& col : t.idx) col.resize(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) {
        Index rem = j;
        for (std::size_t k = 0; k < t.modes.size(); ++k) {
            const Index d = shape.dim(t.modes[k]);
            t.idx[k][static_cast<std::size_t>(j)] = rem % d + 1;
            rem /= d;
        }
    }
    return t;
}

namespace {

inline std::uint64_t mulmod61(std::uint64_t a, std::uint64_t b) {
    const unsigned __int128 t = static_cast<unsigned __int128>(a) * b;
    std::uint64_t lo = static_cast<std::uint64_t>(t) & KWiseHash::prime;
    std::uint64_t hi = static_cast<std::uint64_t>(t >> 61);
    std::uint64_t r = lo + hi;
    if (r >= KWiseHash::prime) r -= KWiseHash::prime;
    return r;
}

}  // namespace

KWiseHash::KWiseHash(Index k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("KWiseHash: independence must be at least 2");
    rng::Rng rng(seed);
    coeffs_.resize(static_cast<std::size_t>(k));
    for (auto& c : coeffs_) c = rng.uniform_u64(0, prime - 1);
}

std::uint64_t KWiseHash::raw(Index x) const {
    const std::uint64_t xv = static_cast<std::uint64_t>(x) % prime;
    std::uint64_t acc = 0;
    for (std::size_t j = coeffs_.size(); j-- > 0;) {
        acc = mulmod61(acc, xv);
        acc += coeffs_[j];
        if (acc >= prime) acc -= prime;
    }
    return acc;
}

TensorSketchOp::TensorSketchOp(const Shape& shape, Index m, std::uint64_t seed)
    : shape_(shape), m_(m) {
    if (m < 1) throw std::invalid_argument("TensorSketchOp: m must be positive");
    const Index N = shape.order();
    bucket_.resize(static_cast<std::size_t>(N));
    sign_.resize(static_cast<std::size_t>(N));
    for (Index mode = 1; mode <= N; ++mode) {
        const KWiseHash h(3, rng::sub_seed(seed, rng::tag_hash, static_cast<std::uint64_t>(mode), 0));
        const KWiseHash s(4, rng::sub_seed(seed, rng::tag_hash, static_cast<std::uint64_t>(mode), 1));
        auto& hb = bucket_[static_cast<std::size_t>(mode - 1)];
        auto& sb = sign_[static_cast<std::size_t>(mode - 1)];
        const Index d = shape.dim(mode);
        hb.resize(static_cast<std::size_t>(d));
        sb.resize(static_cast<std::size_t>(d));
        for (Index i = 1; i <= d; ++i) {
            hb[static_cast<std::size_t>(i - 1)] = h.bucket(i, m);
            sb[static_cast<std::size_t>(i - 1)] = s.sign(i);
        }
    }
}

TensorSketchOp TensorSketchOp::injective(const Shape& shape, Index skip) {
    TensorSketchOp op;
    op.shape_ = shape;
    const Index N = shape.order();
    const auto order = modes_skipping(N, skip);
    Index m = 1;
    for (Index mode : order) m *= shape.dim(mode);
    op.m_ = m;
    op.bucket_.resize(static_cast<std::size_t>(N));
    op.sign_.resize(static_cast<std::size_t>(N));
    for (Index mode = 1; mode <= N; ++mode) {
        const Index d = shape.dim(mode);
        op.bucket_[static_cast<std::size_t>(mode - 1)].assign(static_cast<std::size_t>(d), 1);
        op.sign_[static_cast<std::size_t>(mode - 1)].assign(static_cast<std::size_t>(d), 1.0);
    }
    Index stride = 1;
    for (Index mode : order) {
        const Index d = shape.dim(mode);
        for (Index i = 1; i <= d; ++i)
            op.bucket_[static_cast<std::size_t>(mode - 1)][static_cast<std::size_t>(i - 1)] =
                (i - 1) * stride + 1;
        stride *= d;
    }
    return op;
}

Index TensorSketchOp::combined_bucket(Index skip, const MultiIndex& others) const {
    const auto order = modes_skipping(shape_.order(), skip);
    if (others.size() != order.size())
        throw std::invalid_argument("combined_bucket: index count mismatch");
    Index sum = 0;
    for (std::size_t k = 0; k < order.size(); ++k)
        sum += bucket(order[k], others[k]) - 1;
    return sum % m_ + 1;
}

double TensorSketchOp::combined_sign(Index skip, const MultiIndex& others) const {
    const auto order = modes_skipping(shape_.order(), skip);
    if (others.size() != order.size())
        throw std::invalid_argument("combined_sign: index count mismatch");
    double s = 1.0;
    for (std::size_t k = 0; k < order.size(); ++k) s *= sign(order[k], others[k]);
    return s;
}

LeverageDistribution::LeverageDistribution(const Matd& M, double rank_tol) {
    if (M.rows() < 1 || M.cols() < 1)
        throw std::invalid_argument("LeverageDistribution: empty matrix");
    Vecd lev(M.rows());
    Eigen::ColPivHouseholderQR<Matd> qr(M);
    qr.setThreshold(rank_tol);
    rank_ = qr.rank();
    if (rank_ == 0)
        throw std::runtime_error("LeverageDistribution: zero matrix has no row distribution");
    if (rank_ == M.cols() && M.rows() >= M.cols()) {
        const Matd Q = qr.householderQ() * Matd::Identity(M.rows(), M.cols());
        lev = Q.rowwise().squaredNorm();
    } else {
        Eigen::JacobiSVD<Matd> svd(M, Eigen::ComputeThinU);
        const Vecd& sv = svd.singularValues();
        Index r = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > rank_tol * sv(0)) ++r;
        rank_ = r;
        lev = svd.matrixU().leftCols(r).rowwise().squaredNorm();
    }
    const double total = lev.sum();
    p_ = lev / total;
    cdf_.resize(static_cast<std::size_t>(p_.size()));
    double acc = 0;
    for (Eigen::Index i = 0; i < p_.size(); ++i) {
        acc += p_(i);
        cdf_[static_cast<std::size_t>(i)] = acc;
    }
    cdf_.back() = 1.0;
}

Index LeverageDistribution::sample(rng::Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    Index i = static_cast<Index>(it - cdf_.begin());
    if (i >= static_cast<Index>(cdf_.size())) i = static_cast<Index>(cdf_.size()) - 1;
    return i + 1;
}

LeverageDistribution leverage_distribution(const DenseTensor<double>& core) {
    return LeverageDistribution(core_mode2_unfolding(core));
}

IndexTable draw_joint_samples(const Shape& shape, Index skip, Index m,
                              const std::vector<const LeverageDistribution*>& dists,
                              rng::Rng& rng) {
    if (m < 1) throw std::invalid_argument("draw_joint_samples: m must be positive");
    if (static_cast<Index>(dists.size()) != shape.order())
        throw std::invalid_argument("draw_joint_samples: need one distribution slot per mode");
    IndexTable t;
    t.modes = modes_skipping(shape.order(), skip);
    t.idx.resize(t.modes.size());
    for (std::size_t k = 0; k < t.modes.size(); ++k) {
        const Index mode = t.modes[k];
        const LeverageDistribution* d = dists[static_cast<std::size_t>(mode - 1)];
        if (d && d->probabilities().size() != shape.dim(mode))
            throw std::invalid_argument("draw_joint_samples: distribution size mismatch");
        t.idx[k].resize(static_cast<std::size_t>(m));
        for (Index j = 0; j < m; ++j)
            t.idx[k][static_cast<std::size_t>(j)] =
                d ? d->sample(rng) : rng.uniform_int(1, shape.dim(mode));
    }
    return t;
}

Matz ksrft_sketch_rhs(const DenseTensor<cplx>& Xhat, Index mode, const IndexTable& idxs,
                      const ModeMixer* unmix) {
    if (unmix && unmix->size() != Xhat.dim(mode))
        throw std::invalid_argument("ksrft_sketch_rhs: unmixer size mismatch");
    Matz B = gather_unfolding_rows(Xhat, mode, idxs);
    if (unmix) {
        std::vector<cplx> buf(static_cast<std::size_t>(B.cols()));
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
            for (Eigen::Index i = 0; i < B.cols(); ++i)
                buf[static_cast<std::size_t>(i)] = B(j, i);
            unmix->unmix_fiber(buf.data());
            for (Eigen::Index i = 0; i < B.cols(); ++i)
                B(j, i) = buf[static_cast<std::size_t>(i)];
        }
    }
    return B;
}

DenseTensor<double> tensorsketch_subchain(const TRCores<double>& cores,
                                          const TensorSketchOp& op, Index skip) {
    const Index N = cores.count();
    if (N < 2)
        throw std::invalid_argument("tensorsketch_subchain: need at least two cores");
    if (op.shape() != cores.dims())
        throw std::invalid_argument("tensorsketch_subchain: operator shape mismatch");
    const auto order = modes_skipping(N, skip);
    const Index m = op.m();
    auto sketched = [&](Index mode) {
        DenseTensor<cplx> A = complexify(countsketch_core(cores.core(mode), op, mode));
        transform_mode_fibers(A, 2, [](std::vector<cplx>& buf) { fft::unitary(buf, false); });
        return A;
    };
    DenseTensor<cplx> acc = sketched(order[0]);
    for (std::size_t k = 1; k < order.size(); ++k)
        acc = slices_hadamard(acc, sketched(order[k]));
    transform_mode_fibers(acc, 2, [](std::vector<cplx>& buf) { fft::unitary(buf, true); });
    // Unitary transforms leave one factor of sqrt(m) per extra convolution.
    const double scale = std::pow(static_cast<double>(m),
                                  0.5 * static_cast<double>(order.size() - 1));
    DenseTensor<double> out(acc.shape());
    for (Index k = 0; k < acc.size(); ++k) out[k] = acc[k].real() * scale;
    return out;
}

Matd tensorsketch_rhs(const DenseTensor<double>& X, Index mode, const TensorSketchOp& op) {
    if (op.shape() != X.shape())
        throw std::invalid_argument("tensorsketch_rhs: operator shape mismatch");
    const auto sp = detail::mode_split(X.shape(), mode);
    const auto order = modes_skipping(X.order(), mode);
    Matd out = Matd::Zero(op.m(), sp.mode_size);
    MultiIndex others(order.size());
    for (Index outer = 0; outer < sp.outer_size; ++outer)
        for (Index inner = 0; inner < sp.inner_size; ++inner) {
            // others holds (i_{n+1},...,i_N, i_1,...,i_{n-1}).
            Index rem = outer;
            std::size_t k = 0;
            for (Index mo = mode + 1; mo <= X.order(); ++mo, ++k) {
                others[k] = rem % X.dim(mo) + 1;
                rem /= X.dim(mo);
            }
            rem = inner;
            for (Index mo = 1; mo < mode; ++mo, ++k) {
                others[k] = rem % X.dim(mo) + 1;
                rem /= X.dim(mo);
            }
            const Index h = op.combined_bucket(mode, others);
            const double s = op.combined_sign(mode, others);
            const double* base = X.data() + inner + outer * sp.inner_size * sp.mode_size;
            for (Index i = 0; i < sp.mode_size; ++i)
                out(h - 1, i) += s * base[i * sp.inner_size];
        }
    return out;
}

Matd tensorsketch_rhs(const SparseTensor& X, Index mode, const TensorSketchOp& op) {
    if (op.shape() != X.shape())
        throw std::invalid_argument("tensorsketch_rhs: operator shape mismatch");
    const auto order = modes_skipping(X.order(), mode);
    Matd out = Matd::Zero(op.m(), X.shape().dim(mode));
    MultiIndex others(order.size());
    const auto& idx = X.indices();
    const auto& val = X.values();
    for (std::size_t e = 0; e < val.size(); ++e) {
        for (std::size_t k = 0; k < order.size(); ++k)
            others[k] = idx[e][static_cast<std::size_t>(order[k] - 1)];
        const Index h = op.combined_bucket(mode, others);
        const double s = op.combined_sign(mode, others);
        out(h - 1, idx[e][static_cast<std::size_t>(mode - 1)] - 1) += s * val[e];
    }
    return out;
}

Index recommend_embedding_size(SketchKind kind, Index Rn, Index Rn1, Index N,
                               const std::vector<Index>& other_dims, double eps,
                               double eta) {
    if (Rn < 1 || Rn1 < 1) throw std::invalid_argument("recommend_embedding_size: ranks must be positive");
    if (N < 2) throw std::invalid_argument("recommend_embedding_size: order must be at least 2");
    if (other_dims.empty() || static_cast<Index>(other_dims.size()) != N - 1)
        throw std::invalid_argument("recommend_embedding_size: need N-1 remaining dims");
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw std::invalid_argument("recommend_embedding_size: eps must be positive");
    if (!(eta > 0.0) || eta > 1.0)
        throw std::invalid_argument("recommend_embedding_size: eta must be in (0, 1]");
    double P = 1;
    for (Index d : other_dims) {
        if (d < 1) throw std::invalid_argument("recommend_embedding_size: dims must be positive");
        P *= static_cast<double>(d);
    }
    const double r = static_cast<double>(Rn) * static_cast<double>(Rn1);
    double md;
    if (kind == SketchKind::tensorsketch) {
        md = r * std::pow(3.0, static_cast<double>(N - 1)) * (r + 1.0 / (eps * eps)) / eta;
    } else {
        const double l1 = std::max(std::log(r / eps), 1.0);
        const double l2 = std::max(std::log((r / eps) * l1), 1.0);
        const double l3 = std::max(std::log(P), 1.0);
        md = (1.0 / eps) * std::pow(r, 2.0 * static_cast<double>(N - 1)) *
             std::pow(l1, static_cast<double>(2 * N - 3)) * std::pow(l2, 4.0) * l3;
    }
    md = std::ceil(md);
    if (md < 1) md = 1;
    if (md > P) md = P;
    return static_cast<Index>(md);
}

}  // namespace trs
