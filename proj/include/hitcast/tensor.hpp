#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "hitcast/errors.hpp"

namespace hitcast {

/// Flat row-major numeric array with a shape and an optional gradient buffer.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;
    std::vector<double> grad;  // empty, or one slot per value

    Tensor() = default;
    Tensor(std::vector<std::size_t> s, double fill = 0.0)
        : shape(std::move(s)), values(count(shape), fill) {}

    static std::size_t count(const std::vector<std::size_t>& s) {
        return std::accumulate(s.begin(), s.end(), std::size_t{1},
                               [](std::size_t a, std::size_t b) { return a * b; });
    }

    std::size_t numel() const { return values.size(); }

    /// [C x H x W] accessor; only meaningful for rank-3 tensors.
    double& at3(std::size_t c, std::size_t h, std::size_t w) {
        return values[(c * shape[1] + h) * shape[2] + w];
    }
    double at3(std::size_t c, std::size_t h, std::size_t w) const {
        return values[(c * shape[1] + h) * shape[2] + w];
    }

    void ensure_grad() {
        if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
    }

    void check() const {
        if (count(shape) != values.size())
            throw ShapeError("tensor shape/value count mismatch");
        if (!grad.empty() && grad.size() != values.size())
            throw ShapeError("tensor grad length differs from values");
    }
};

inline void require_rank3(const Tensor& t, const std::string& who) {
    if (t.shape.size() != 3) throw ShapeError(who + ": expected a C x H x W tensor");
}

}  // namespace hitcast
