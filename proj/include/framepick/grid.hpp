#pragma once

#include <cstddef>
#include <vector>

#include "framepick/errors.hpp"

namespace framepick {

// Dense row-major 2-D array. Rows index time positions, columns index
// frequency/scale channels throughout the library.
template <typename T>
class Grid {
public:
    Grid() = default;

    Grid(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }

    bool same_shape(const Grid& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

inline void require_same_shape(std::size_t ra, std::size_t ca, std::size_t rb, std::size_t cb,
                               const char* what) {
    if (ra != rb || ca != cb) {
        throw ValidationError(std::string(what) + ": shape mismatch (" + std::to_string(ra) +
                              "x" + std::to_string(ca) + " vs " + std::to_string(rb) + "x" +
                              std::to_string(cb) + ")");
    }
}

} // namespace framepick
