#pragma once

#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace vesseltopo {

/// Minimal row-major 2-D buffer used by the raster / topology code.
/// Kept independent of torch so the metric engine has no autograd path
/// in common with the losses it cross-checks.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int rows, int cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("Grid: negative shape");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    const T& operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    bool inside(int r, int c) const { return r >= 0 && r < rows_ && c >= 0 && c < cols_; }
    T at_or(int r, int c, T fallback) const { return inside(r, c) ? (*this)(r, c) : fallback; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    bool operator==(const Grid& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

using MaskGrid = Grid<uint8_t>;

struct PixelCoord {
    int row = 0;
    int col = 0;
};

inline double pixel_distance(const PixelCoord& a, const PixelCoord& b) {
    const double dr = a.row - b.row, dc = a.col - b.col;
    return std::sqrt(dr * dr + dc * dc);
}

/// Seedable random stream. All randomness in the library flows through
/// explicit streams so results are reproducible across platforms; the
/// mapping from raw engine output to doubles is pinned here instead of
/// relying on std <random> distributions, whose output is
/// implementation-defined.
class RngStream {
public:
    explicit RngStream(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int64_t>(engine_() % span);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (deterministic, unlike std::normal_distribution).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * M_PI * u2);
        has_spare_ = true;
        return mag * std::cos(2.0 * M_PI * u2);
    }

    /// Derive an independent child stream (e.g. one per augmentation worker).
    RngStream fork(uint64_t salt) {
        return RngStream(next_u64() ^ (0x9e3779b97f4a7c15ULL * (salt + 1)));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        // Fisher-Yates with our own index draw, for cross-platform determinism.
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// ---- torch interop -------------------------------------------------------

inline MaskGrid tensor_to_mask(const torch::Tensor& t) {
    auto u = t.to(torch::kUInt8).contiguous();
    TORCH_CHECK(u.dim() == 2, "tensor_to_mask expects a 2-D tensor");
    MaskGrid g(static_cast<int>(u.size(0)), static_cast<int>(u.size(1)));
    std::memcpy(g.data(), u.data_ptr<uint8_t>(), g.size());
    return g;
}

inline torch::Tensor mask_to_tensor(const MaskGrid& g) {
    auto t = torch::empty({g.rows(), g.cols()}, torch::kUInt8);
    std::memcpy(t.data_ptr<uint8_t>(), g.data(), g.size());
    return t;
}

inline Grid<float> tensor_to_grid_f(const torch::Tensor& t) {
    auto f = t.to(torch::kFloat32).contiguous();
    TORCH_CHECK(f.dim() == 2, "tensor_to_grid_f expects a 2-D tensor");
    Grid<float> g(static_cast<int>(f.size(0)), static_cast<int>(f.size(1)));
    std::memcpy(g.data(), f.data_ptr<float>(), g.size() * sizeof(float));
    return g;
}

inline void seed_everything(uint64_t seed) { torch::manual_seed(seed); }

}  // namespace vesseltopo
