#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <vector>

namespace mpnet {

// Boolean attention-permission matrix. Row = attending slot, column =
// attended slot. Stored dense on purpose: these matrices are the objective's
// definition and get dumped/compared verbatim.
struct BoolMatrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<uint8_t> bits;  // row-major, 0/1

    BoolMatrix() = default;
    BoolMatrix(size_t r, size_t c, bool fill = false)
        : rows(r), cols(c), bits(r * c, fill ? 1 : 0) {}

    bool at(size_t r, size_t c) const { return bits[r * cols + c] != 0; }
    void set(size_t r, size_t c, bool v) { bits[r * cols + c] = v ? 1 : 0; }
    size_t row_count_true(size_t r) const {
        size_t n = 0;
        for (size_t c = 0; c < cols; ++c) n += bits[r * cols + c];
        return n;
    }
    bool operator==(const BoolMatrix& o) const {
        return rows == o.rows && cols == o.cols && bits == o.bits;
    }
};

namespace detail {
struct TensorData {
    std::vector<size_t> shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until something accumulates into it
    bool requires_grad = false;
};
}  // namespace detail

// Dense real tensor, double precision, value-semantic handle onto shared
// storage. Rank 0..2 is all the transformer needs; ops check ranks.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<size_t> shape, bool requires_grad = false);
    static Tensor full(std::vector<size_t> shape, double value, bool requires_grad = false);
    static Tensor from_data(std::vector<size_t> shape, std::vector<double> data,
                            bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    // normal(0, stddev) entries
    static Tensor randn(std::vector<size_t> shape, std::mt19937_64& rng, double stddev,
                        bool requires_grad = false);

    bool defined() const { return d_ != nullptr; }
    const std::vector<size_t>& shape() const { return d_->shape; }
    size_t numel() const { return d_->data.size(); }
    size_t rank() const { return d_->shape.size(); }
    // rank-2 accessors (rank-1 tensors count as a single row)
    size_t rows() const;
    size_t cols() const;

    std::vector<double>& data() { return d_->data; }
    const std::vector<double>& data() const { return d_->data; }
    double value() const;  // scalar only
    double& at(size_t r, size_t c) { return d_->data[r * cols() + c]; }
    double at(size_t r, size_t c) const { return d_->data[r * cols() + c]; }

    bool requires_grad() const { return d_->requires_grad; }
    void set_requires_grad(bool v) { d_->requires_grad = v; }
    bool has_grad() const { return d_ && !d_->grad.empty(); }
    // allocates a zero grad on first use
    std::vector<double>& grad();
    const std::vector<double>& grad() const { return d_->grad; }
    void zero_grad();

    bool same_storage(const Tensor& o) const { return d_ == o.d_; }

private:
    friend class Tape;
    std::shared_ptr<detail::TensorData> d_;
    explicit Tensor(std::shared_ptr<detail::TensorData> d) : d_(std::move(d)) {}
};

// Reverse-mode tape. Operations are recorded in execution order, which is
// already a topological order of the graph; backward() replays it in
// reverse. One tape per forward pass, confined to one thread.
class Tape {
public:
    // When false, ops compute forward values but record nothing (eval mode).
    bool recording = true;

    // elementwise
    Tensor add(const Tensor& a, const Tensor& b);
    Tensor mul(const Tensor& a, const Tensor& b);
    Tensor scale(const Tensor& a, double k);
    // matrix (m×n) + row vector (n), broadcast over rows
    Tensor add_bias(const Tensor& m, const Tensor& bias);
    // row vector (n) replicated to (rows×n)
    Tensor broadcast_rows(const Tensor& v, size_t rows);

    Tensor matmul(const Tensor& a, const Tensor& b);     // (m×k)·(k×n)
    Tensor matmul_nt(const Tensor& a, const Tensor& b);  // (m×k)·(n×k)ᵀ

    // rows of `table` selected by index; backward scatter-adds, so repeated
    // indices accumulate (required for tied embeddings)
    Tensor gather_rows(const Tensor& table, const std::vector<int>& idx);
    // t[i,j] = table(grid[i*cols+j], head) for a (buckets×heads) table
    Tensor bias_lookup(const Tensor& table, const std::vector<int>& grid, size_t rows,
                       size_t cols, size_t head);

    Tensor slice_cols(const Tensor& x, size_t c0, size_t c1);
    Tensor concat_cols(std::span<const Tensor> parts);

    // Row-wise softmax over the allowed set only; disallowed entries are
    // exactly 0 and never read, rows are max-subtracted for stability.
    Tensor masked_softmax_rows(const Tensor& scores, const BoolMatrix& allow);

    // normalization over the last axis with learned scale/shift (both rank 1)
    Tensor layer_norm(const Tensor& x, const Tensor& scale, const Tensor& shift);

    Tensor gelu(const Tensor& x);  // exact erf form

    // inverted dropout; identity when p == 0
    Tensor dropout(const Tensor& x, double p, std::mt19937_64& rng);

    // mean negative log-softmax probability of targets, over logit rows
    Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets);

    Tensor sum(const Tensor& x);

    // Accumulates d(loss)/d(t) into every requires_grad tensor reachable
    // from `loss` on this tape; unreachable grads are untouched.
    void backward(const Tensor& loss);

    size_t size() const { return records_.size(); }
    void clear() { records_.clear(); }

private:
    std::vector<std::function<void()>> records_;
    void record(bool needs_grad, std::function<void()> fn);
    static Tensor make(std::vector<size_t> shape, bool requires_grad);
};

// Per-row negative log-softmax probabilities, no tape involvement. Shares
// the cross_entropy arithmetic for metrics reporting.
std::vector<double> nll_per_row(const Tensor& logits, const std::vector<int>& targets);

// row-major C(m×n) = op(A)(m×k)·op(B)(k×n) [+ C if accumulate]; storage is
// A:(m×k) or (k×m) when ta, B:(k×n) or (n×k) when tb. BLAS-backed when built
// with MPNET_USE_BLAS, portable loops otherwise.
void gemm(bool ta, bool tb, size_t m, size_t n, size_t k, const double* a, const double* b,
          double* c, bool accumulate);

}  // namespace mpnet
