#ifndef HANTEXT_TENSOR_HPP
#define HANTEXT_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hantext {

// Row-major dense matrix of doubles. A vector is a 1 x n or n x 1 matrix;
// free functions below treat Matrix with rows==1 as a row vector where it
// matters.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    Matrix& operator+=(const Matrix& o) {
        require_same_shape(o, "operator+=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        require_same_shape(o, "operator-=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Matrix& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }

    void require_same_shape(const Matrix& o, const std::string& who) const {
        if (!same_shape(o))
            throw std::invalid_argument(who + ": shape mismatch " + shape_str() + " vs " + o.shape_str());
    }

    std::string shape_str() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

// Seeded deterministic RNG. mt19937_64's raw output sequence is pinned by the
// standard, so we draw raw 64-bit words and convert to doubles ourselves;
// std::uniform_real_distribution would not be reproducible across standard
// library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // uniform integer in [0, n)
    std::size_t next_index(std::size_t n) {
        // modulo bias is negligible for n << 2^64 and irrelevant for
        // reproducibility, which is the actual contract here
        return static_cast<std::size_t>(engine_() % n);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[next_index(i)]);
    }

private:
    std::mt19937_64 engine_;
};

// Derive a per-task seed from a base seed and task coordinates, so parallel
// fold workers draw from independent deterministic streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    // splitmix64 finalizer over the mixed coordinates
    std::uint64_t x = base + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
    x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27; x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline Matrix uniform_init(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng) {
    if (!(lo < hi)) throw std::invalid_argument("uniform_init: lo must be < hi");
    Matrix m(rows, cols);
    for (double& v : m.raw()) v = rng.uniform(lo, hi);
    return m;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dimensions differ, " + a.shape_str() + " * " + b.shape_str());
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

inline Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            out(j, i) = a(i, j);
    return out;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
    Matrix out = a;
    out += b;
    return out;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
    a.require_same_shape(b, "hadamard");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] *= b.raw()[i];
    return out;
}

// Per-column maximum with first-occurrence argmax row index.
inline std::pair<std::vector<double>, std::vector<std::size_t>> colwise_max(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0)
        throw std::invalid_argument("colwise_max: empty input");
    std::vector<double> best(a.cols());
    std::vector<std::size_t> arg(a.cols(), 0);
    for (std::size_t j = 0; j < a.cols(); ++j) best[j] = a(0, j);
    for (std::size_t i = 1; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (a(i, j) > best[j]) { best[j] = a(i, j); arg[j] = i; }
    return {std::move(best), std::move(arg)};
}

inline std::vector<double> softmax(const std::vector<double>& logits) {
    if (logits.empty()) throw std::invalid_argument("softmax: empty input");
    for (double v : logits)
        if (std::isnan(v)) throw std::invalid_argument("softmax: NaN input");
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

inline std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace hantext

#endif
