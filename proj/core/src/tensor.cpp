#include "mpnet/tensor.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <string>

#ifdef MPNET_USE_BLAS
extern "C" void dgemm_(const char*, const char*, const int*, const int*, const int*,
                       const double*, const double*, const int*, const double*, const int*,
                       const double*, double*, const int*);
extern "C" void openblas_set_num_threads(int) __attribute__((weak));
#endif

namespace mpnet {

namespace {

constexpr double kLnEps = 1e-5;  // layer_norm variance floor

#ifdef MPNET_USE_BLAS
// Deterministic single-threaded BLAS; the trainer owns the one core.
struct BlasInit {
    BlasInit() {
        setenv("OPENBLAS_NUM_THREADS", "1", 0);
        if (openblas_set_num_threads) openblas_set_num_threads(1);
    }
};
const BlasInit blas_init{};
#endif

size_t shape_numel(const std::vector<size_t>& shape) {
    size_t n = 1;
    for (size_t s : shape) {
        if (s == 0) throw std::invalid_argument("tensor extents must be positive");
        n *= s;
    }
    return n;
}

void ensure_grad(detail::TensorData& d) {
    if (d.grad.empty()) d.grad.assign(d.data.size(), 0.0);
}

[[noreturn]] void shape_error(const char* op) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace

void gemm(bool ta, bool tb, size_t m, size_t n, size_t k, const double* a, const double* b,
          double* c, bool accumulate) {
#ifdef MPNET_USE_BLAS
    const int im = static_cast<int>(m), in = static_cast<int>(n), ik = static_cast<int>(k);
    const double alpha = 1.0, beta = accumulate ? 1.0 : 0.0;
    const char* opa = ta ? "T" : "N";
    const char* opb = tb ? "T" : "N";
    const int lda = ta ? im : ik;
    const int ldb = tb ? ik : in;
    // row-major product expressed as the column-major product of the
    // transposes, operands swapped
    dgemm_(opb, opa, &in, &im, &ik, &alpha, b, &ldb, a, &lda, &beta, c, &in);
#else
    if (!accumulate) std::fill(c, c + m * n, 0.0);
    for (size_t i = 0; i < m; ++i) {
        for (size_t l = 0; l < k; ++l) {
            const double av = ta ? a[l * m + i] : a[i * k + l];
            const double* brow = tb ? nullptr : b + l * n;
            if (!tb) {
                double* crow = c + i * n;
                for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
            } else {
                for (size_t j = 0; j < n; ++j) c[i * n + j] += av * b[j * k + l];
            }
        }
    }
#endif
}

// ---------------------------------------------------------------------------
// Tensor

Tensor Tensor::zeros(std::vector<size_t> shape, bool requires_grad) {
    auto d = std::make_shared<detail::TensorData>();
    d->data.assign(shape_numel(shape), 0.0);
    d->shape = std::move(shape);
    d->requires_grad = requires_grad;
    return Tensor(std::move(d));
}

Tensor Tensor::full(std::vector<size_t> shape, double value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    std::fill(t.data().begin(), t.data().end(), value);
    return t;
}

Tensor Tensor::from_data(std::vector<size_t> shape, std::vector<double> data,
                         bool requires_grad) {
    if (shape_numel(shape) != data.size())
        throw std::invalid_argument("from_data: shape does not match data length");
    auto d = std::make_shared<detail::TensorData>();
    d->shape = std::move(shape);
    d->data = std::move(data);
    d->requires_grad = requires_grad;
    return Tensor(std::move(d));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

Tensor Tensor::randn(std::vector<size_t> shape, std::mt19937_64& rng, double stddev,
                     bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    std::normal_distribution<double> dist(0.0, stddev);
    for (double& v : t.data()) v = dist(rng);
    return t;
}

size_t Tensor::rows() const { return rank() == 2 ? d_->shape[0] : 1; }
size_t Tensor::cols() const { return rank() == 2 ? d_->shape[1] : d_->shape[0]; }

double Tensor::value() const {
    if (numel() != 1) throw std::invalid_argument("value: tensor is not scalar");
    return d_->data[0];
}

std::vector<double>& Tensor::grad() {
    ensure_grad(*d_);
    return d_->grad;
}

void Tensor::zero_grad() {
    if (d_ && !d_->grad.empty()) std::fill(d_->grad.begin(), d_->grad.end(), 0.0);
}

// ---------------------------------------------------------------------------
// Tape

void Tape::record(bool needs_grad, std::function<void()> fn) {
    if (recording && needs_grad) records_.push_back(std::move(fn));
}

Tensor Tape::make(std::vector<size_t> shape, bool requires_grad) {
    return Tensor::zeros(std::move(shape), requires_grad);
}

void Tape::backward(const Tensor& loss) {
    if (loss.numel() != 1) throw std::invalid_argument("backward: loss must be scalar");
    ensure_grad(*loss.d_);
    loss.d_->grad[0] += 1.0;
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)();
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) shape_error("add");
    const bool needs = a.requires_grad() || b.requires_grad();
    Tensor out = make(a.shape(), needs);
    const size_t n = a.numel();
    for (size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] + b.data()[i];
    auto ad = a.d_, bd = b.d_, od = out.d_;
    record(needs, [ad, bd, od] {
        if (od->grad.empty()) return;
        if (ad->requires_grad) {
            ensure_grad(*ad);
            for (size_t i = 0; i < od->grad.size(); ++i) ad->grad[i] += od->grad[i];
        }
        if (bd->requires_grad) {
            ensure_grad(*bd);
            for (size_t i = 0; i < od->grad.size(); ++i) bd->grad[i] += od->grad[i];
        }
    });
    return out;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) shape_error("mul");
    const bool needs = a.requires_grad() || b.requires_grad();
    Tensor out = make(a.shape(), needs);
    const size_t n = a.numel();
    for (size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] * b.data()[i];
    auto ad = a.d_, bd = b.d_, od = out.d_;
    record(needs, [ad, bd, od] {
        if (od->grad.empty()) return;
        if (ad->requires_grad) {
            ensure_grad(*ad);
            for (size_t i = 0; i < od->grad.size(); ++i) ad->grad[i] += od->grad[i] * bd->data[i];
        }
        if (bd->requires_grad) {
            ensure_grad(*bd);
            for (size_t i = 0; i < od->grad.size(); ++i) bd->grad[i] += od->grad[i] * ad->data[i];
        }
    });
    return out;
}

Tensor Tape::scale(const Tensor& a, double k) {
    const bool needs = a.requires_grad();
    Tensor out = make(a.shape(), needs);
    for (size_t i = 0; i < a.numel(); ++i) out.data()[i] = a.data()[i] * k;
    auto ad = a.d_, od = out.d_;
    record(needs, [ad, od, k] {
        if (od->grad.empty()) return;
        ensure_grad(*ad);
        for (size_t i = 0; i < od->grad.size(); ++i) ad->grad[i] += od->grad[i] * k;
    });
    return out;
}

Tensor Tape::add_bias(const Tensor& m, const Tensor& bias) {
    if (m.rank() != 2 || bias.rank() != 1 || m.cols() != bias.cols()) shape_error("add_bias");
    const bool needs = m.requires_grad() || bias.requires_grad();
    const size_t r = m.rows(), c = m.cols();
    Tensor out = make(m.shape(), needs);
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < c; ++j) out.data()[i * c + j] = m.data()[i * c + j] + bias.data()[j];
    auto md = m.d_, bd = bias.d_, od = out.d_;
    record(needs, [md, bd, od, r, c] {
        if (od->grad.empty()) return;
        if (md->requires_grad) {
            ensure_grad(*md);
            for (size_t i = 0; i < r * c; ++i) md->grad[i] += od->grad[i];
        }
        if (bd->requires_grad) {
            ensure_grad(*bd);
            for (size_t i = 0; i < r; ++i)
                for (size_t j = 0; j < c; ++j) bd->grad[j] += od->grad[i * c + j];
        }
    });
    return out;
}

Tensor Tape::broadcast_rows(const Tensor& v, size_t rows) {
    if (v.rank() != 1) shape_error("broadcast_rows");
    const bool needs = v.requires_grad();
    const size_t c = v.cols();
    Tensor out = make({rows, c}, needs);
    for (size_t i = 0; i < rows; ++i)
        std::copy(v.data().begin(), v.data().end(), out.data().begin() + i * c);
    auto vd = v.d_, od = out.d_;
    record(needs, [vd, od, rows, c] {
        if (od->grad.empty()) return;
        ensure_grad(*vd);
        for (size_t i = 0; i < rows; ++i)
            for (size_t j = 0; j < c; ++j) vd->grad[j] += od->grad[i * c + j];
    });
    return out;
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) shape_error("matmul");
    const bool needs = a.requires_grad() || b.requires_grad();
    const size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out = make({m, n}, needs);
    gemm(false, false, m, n, k, a.data().data(), b.data().data(), out.data().data(), false);
    auto ad = a.d_, bd = b.d_, od = out.d_;
    record(needs, [ad, bd, od, m, n, k] {
        if (od->grad.empty()) return;
        if (ad->requires_grad) {
            ensure_grad(*ad);  // dA += G·Bᵀ
            gemm(false, true, m, k, n, od->grad.data(), bd->data.data(), ad->grad.data(), true);
        }
        if (bd->requires_grad) {
            ensure_grad(*bd);  // dB += Aᵀ·G
            gemm(true, false, k, n, m, ad->data.data(), od->grad.data(), bd->grad.data(), true);
        }
    });
    return out;
}

Tensor Tape::matmul_nt(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.cols()) shape_error("matmul_nt");
    const bool needs = a.requires_grad() || b.requires_grad();
    const size_t m = a.rows(), k = a.cols(), n = b.rows();
    Tensor out = make({m, n}, needs);
    gemm(false, true, m, n, k, a.data().data(), b.data().data(), out.data().data(), false);
    auto ad = a.d_, bd = b.d_, od = out.d_;
    record(needs, [ad, bd, od, m, n, k] {
        if (od->grad.empty()) return;
        if (ad->requires_grad) {
            ensure_grad(*ad);  // dA += G·B
            gemm(false, false, m, k, n, od->grad.data(), bd->data.data(), ad->grad.data(), true);
        }
        if (bd->requires_grad) {
            ensure_grad(*bd);  // dB += Gᵀ·A
            gemm(true, false, n, k, m, od->grad.data(), ad->data.data(), bd->grad.data(), true);
        }
    });
    return out;
}

Tensor Tape::gather_rows(const Tensor& table, const std::vector<int>& idx) {
    if (table.rank() != 2) shape_error("gather_rows");
    const size_t r = table.rows(), c = table.cols();
    for (int i : idx)
        if (i < 0 || static_cast<size_t>(i) >= r)
            throw std::invalid_argument("gather_rows: index out of range");
    const bool needs = table.requires_grad();
    Tensor out = make({idx.size(), c}, needs);
    for (size_t i = 0; i < idx.size(); ++i)
        std::copy_n(table.data().begin() + static_cast<size_t>(idx[i]) * c, c,
                    out.data().begin() + i * c);
    auto td = table.d_, od = out.d_;
    record(needs, [td, od, idx, c] {
        if (od->grad.empty()) return;
        ensure_grad(*td);  // scatter-add: repeated indices accumulate
        for (size_t i = 0; i < idx.size(); ++i) {
            double* dst = td->grad.data() + static_cast<size_t>(idx[i]) * c;
            const double* src = od->grad.data() + i * c;
            for (size_t j = 0; j < c; ++j) dst[j] += src[j];
        }
    });
    return out;
}

Tensor Tape::bias_lookup(const Tensor& table, const std::vector<int>& grid, size_t rows,
                         size_t cols, size_t head) {
    if (table.rank() != 2 || head >= table.cols() || grid.size() != rows * cols)
        shape_error("bias_lookup");
    const size_t buckets = table.rows(), heads = table.cols();
    for (int g : grid)
        if (g < 0 || static_cast<size_t>(g) >= buckets)
            throw std::invalid_argument("bias_lookup: bucket out of range");
    const bool needs = table.requires_grad();
    Tensor out = make({rows, cols}, needs);
    for (size_t i = 0; i < rows * cols; ++i)
        out.data()[i] = table.data()[static_cast<size_t>(grid[i]) * heads + head];
    auto td = table.d_, od = out.d_;
    record(needs, [td, od, grid, heads, head] {
        if (od->grad.empty()) return;
        ensure_grad(*td);
        for (size_t i = 0; i < grid.size(); ++i)
            td->grad[static_cast<size_t>(grid[i]) * heads + head] += od->grad[i];
    });
    return out;
}

Tensor Tape::slice_cols(const Tensor& x, size_t c0, size_t c1) {
    if (x.rank() != 2 || c0 >= c1 || c1 > x.cols()) shape_error("slice_cols");
    const size_t r = x.rows(), c = x.cols(), w = c1 - c0;
    const bool needs = x.requires_grad();
    Tensor out = make({r, w}, needs);
    for (size_t i = 0; i < r; ++i)
        std::copy_n(x.data().begin() + i * c + c0, w, out.data().begin() + i * w);
    auto xd = x.d_, od = out.d_;
    record(needs, [xd, od, r, c, c0, w] {
        if (od->grad.empty()) return;
        ensure_grad(*xd);
        for (size_t i = 0; i < r; ++i)
            for (size_t j = 0; j < w; ++j) xd->grad[i * c + c0 + j] += od->grad[i * w + j];
    });
    return out;
}

Tensor Tape::concat_cols(std::span<const Tensor> parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: empty input");
    const size_t r = parts[0].rows();
    size_t total = 0;
    bool needs = false;
    for (const Tensor& p : parts) {
        if (p.rank() != 2 || p.rows() != r) shape_error("concat_cols");
        total += p.cols();
        needs = needs || p.requires_grad();
    }
    Tensor out = make({r, total}, needs);
    size_t off = 0;
    for (const Tensor& p : parts) {
        const size_t w = p.cols();
        for (size_t i = 0; i < r; ++i)
            std::copy_n(p.data().begin() + i * w, w, out.data().begin() + i * total + off);
        off += w;
    }
    std::vector<std::shared_ptr<detail::TensorData>> pd;
    pd.reserve(parts.size());
    for (const Tensor& p : parts) pd.push_back(p.d_);
    auto od = out.d_;
    record(needs, [pd, od, r, total] {
        if (od->grad.empty()) return;
        size_t off2 = 0;
        for (auto& p : pd) {
            const size_t w = p->data.size() / r;
            if (p->requires_grad) {
                ensure_grad(*p);
                for (size_t i = 0; i < r; ++i)
                    for (size_t j = 0; j < w; ++j)
                        p->grad[i * w + j] += od->grad[i * total + off2 + j];
            }
            off2 += w;
        }
    });
    return out;
}

Tensor Tape::masked_softmax_rows(const Tensor& scores, const BoolMatrix& allow) {
    if (scores.rank() != 2 || scores.rows() != allow.rows || scores.cols() != allow.cols)
        shape_error("masked_softmax_rows");
    const size_t r = scores.rows(), c = scores.cols();
    const bool needs = scores.requires_grad();
    Tensor out = make({r, c}, needs);
    for (size_t i = 0; i < r; ++i) {
        // max over the allowed set only; disallowed scores are never read
        double mx = -std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < c; ++j)
            if (allow.at(i, j)) mx = std::max(mx, scores.data()[i * c + j]);
        if (mx == -std::numeric_limits<double>::infinity())
            throw std::invalid_argument("masked_softmax_rows: row with no allowed entry");
        double z = 0.0;
        for (size_t j = 0; j < c; ++j) {
            if (allow.at(i, j)) {
                const double e = std::exp(scores.data()[i * c + j] - mx);
                out.data()[i * c + j] = e;
                z += e;
            }
        }
        for (size_t j = 0; j < c; ++j)
            if (allow.at(i, j)) out.data()[i * c + j] /= z;
    }
    auto sd = scores.d_, od = out.d_;
    record(needs, [sd, od, r, c] {
        if (od->grad.empty()) return;
        ensure_grad(*sd);
        // p==0 exactly marks disallowed (or fully underflowed) entries; both
        // get zero gradient, so the mask is not needed here
        for (size_t i = 0; i < r; ++i) {
            double dot = 0.0;
            for (size_t j = 0; j < c; ++j) dot += od->grad[i * c + j] * od->data[i * c + j];
            for (size_t j = 0; j < c; ++j)
                sd->grad[i * c + j] += od->data[i * c + j] * (od->grad[i * c + j] - dot);
        }
    });
    return out;
}

Tensor Tape::layer_norm(const Tensor& x, const Tensor& scale, const Tensor& shift) {
    if (x.rank() != 2 || scale.rank() != 1 || shift.rank() != 1 || scale.cols() != x.cols() ||
        shift.cols() != x.cols())
        shape_error("layer_norm");
    const size_t r = x.rows(), c = x.cols();
    const bool needs = x.requires_grad() || scale.requires_grad() || shift.requires_grad();
    Tensor out = make({r, c}, needs);
    std::vector<double> xhat(r * c), inv_sigma(r);
    for (size_t i = 0; i < r; ++i) {
        const double* row = x.data().data() + i * c;
        double mu = 0.0;
        for (size_t j = 0; j < c; ++j) mu += row[j];
        mu /= static_cast<double>(c);
        double var = 0.0;
        for (size_t j = 0; j < c; ++j) var += (row[j] - mu) * (row[j] - mu);
        var /= static_cast<double>(c);
        const double inv = 1.0 / std::sqrt(var + kLnEps);
        inv_sigma[i] = inv;
        for (size_t j = 0; j < c; ++j) {
            const double h = (row[j] - mu) * inv;
            xhat[i * c + j] = h;
            out.data()[i * c + j] = h * scale.data()[j] + shift.data()[j];
        }
    }
    auto xd = x.d_, gd = scale.d_, bd = shift.d_, od = out.d_;
    record(needs, [xd, gd, bd, od, xhat = std::move(xhat), inv_sigma = std::move(inv_sigma), r,
                   c] {
        if (od->grad.empty()) return;
        for (size_t i = 0; i < r; ++i) {
            const double* g = od->grad.data() + i * c;
            const double* h = xhat.data() + i * c;
            if (gd->requires_grad) {
                ensure_grad(*gd);
                for (size_t j = 0; j < c; ++j) gd->grad[j] += g[j] * h[j];
            }
            if (bd->requires_grad) {
                ensure_grad(*bd);
                for (size_t j = 0; j < c; ++j) bd->grad[j] += g[j];
            }
            if (xd->requires_grad) {
                ensure_grad(*xd);
                double mean_a = 0.0, mean_ah = 0.0;
                for (size_t j = 0; j < c; ++j) {
                    const double a = g[j] * gd->data[j];
                    mean_a += a;
                    mean_ah += a * h[j];
                }
                mean_a /= static_cast<double>(c);
                mean_ah /= static_cast<double>(c);
                for (size_t j = 0; j < c; ++j) {
                    const double a = g[j] * gd->data[j];
                    xd->grad[i * c + j] += inv_sigma[i] * (a - mean_a - h[j] * mean_ah);
                }
            }
        }
    });
    return out;
}

Tensor Tape::gelu(const Tensor& x) {
    const bool needs = x.requires_grad();
    Tensor out = make(x.shape(), needs);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (size_t i = 0; i < x.numel(); ++i) {
        const double v = x.data()[i];
        out.data()[i] = 0.5 * v * (1.0 + std::erf(v * inv_sqrt2));
    }
    auto xd = x.d_, od = out.d_;
    record(needs, [xd, od, inv_sqrt2] {
        if (od->grad.empty()) return;
        ensure_grad(*xd);
        const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * M_PI);
        for (size_t i = 0; i < od->grad.size(); ++i) {
            const double v = xd->data[i];
            const double phi = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
            const double dens = std::exp(-0.5 * v * v) * inv_sqrt_2pi;
            xd->grad[i] += od->grad[i] * (phi + v * dens);
        }
    });
    return out;
}

Tensor Tape::dropout(const Tensor& x, double p, std::mt19937_64& rng) {
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must be in [0,1)");
    if (p == 0.0) return x;
    const double keep = 1.0 - p;
    std::bernoulli_distribution coin(keep);
    std::vector<double> mask(x.numel());
    for (double& m : mask) m = coin(rng) ? 1.0 / keep : 0.0;
    const bool needs = x.requires_grad();
    Tensor out = make(x.shape(), needs);
    for (size_t i = 0; i < x.numel(); ++i) out.data()[i] = x.data()[i] * mask[i];
    auto xd = x.d_, od = out.d_;
    record(needs, [xd, od, mask = std::move(mask)] {
        if (od->grad.empty()) return;
        ensure_grad(*xd);
        for (size_t i = 0; i < od->grad.size(); ++i) xd->grad[i] += od->grad[i] * mask[i];
    });
    return out;
}

Tensor Tape::cross_entropy(const Tensor& logits, const std::vector<int>& targets) {
    if (logits.rank() != 2 || logits.rows() != targets.size()) shape_error("cross_entropy");
    const size_t t = logits.rows(), v = logits.cols();
    for (int id : targets)
        if (id < 0 || static_cast<size_t>(id) >= v)
            throw std::invalid_argument("cross_entropy: target id out of range");
    const bool needs = logits.requires_grad();
    // save the softmax for backward
    std::vector<double> probs(t * v);
    double total = 0.0;
    for (size_t i = 0; i < t; ++i) {
        const double* row = logits.data().data() + i * v;
        const double mx = *std::max_element(row, row + v);
        double z = 0.0;
        for (size_t j = 0; j < v; ++j) {
            const double e = std::exp(row[j] - mx);
            probs[i * v + j] = e;
            z += e;
        }
        for (size_t j = 0; j < v; ++j) probs[i * v + j] /= z;
        total += mx + std::log(z) - row[targets[i]];
    }
    Tensor out = Tensor::scalar(total / static_cast<double>(t), needs);
    auto ld = logits.d_, od = out.d_;
    record(needs, [ld, od, probs = std::move(probs), targets, t, v] {
        if (od->grad.empty()) return;
        ensure_grad(*ld);
        const double g = od->grad[0] / static_cast<double>(t);
        for (size_t i = 0; i < t; ++i) {
            for (size_t j = 0; j < v; ++j) ld->grad[i * v + j] += g * probs[i * v + j];
            ld->grad[i * v + targets[i]] -= g;
        }
    });
    return out;
}

Tensor Tape::sum(const Tensor& x) {
    const bool needs = x.requires_grad();
    double s = 0.0;
    for (double v : x.data()) s += v;
    Tensor out = Tensor::scalar(s, needs);
    auto xd = x.d_, od = out.d_;
    record(needs, [xd, od] {
        if (od->grad.empty()) return;
        ensure_grad(*xd);
        for (double& g : xd->grad) g += od->grad[0];
    });
    return out;
}

std::vector<double> nll_per_row(const Tensor& logits, const std::vector<int>& targets) {
    if (logits.rank() != 2 || logits.rows() != targets.size())
        shape_error("nll_per_row");
    const size_t t = logits.rows(), v = logits.cols();
    std::vector<double> out(t);
    for (size_t i = 0; i < t; ++i) {
        const double* row = logits.data().data() + i * v;
        const double mx = *std::max_element(row, row + v);
        double z = 0.0;
        for (size_t j = 0; j < v; ++j) z += std::exp(row[j] - mx);
        out[i] = mx + std::log(z) - row[targets[i]];
    }
    return out;
}

}  // namespace mpnet
