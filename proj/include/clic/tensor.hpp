#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

namespace clic {

/// Dense row-major numeric array. Training math runs in double precision;
/// the 32-bit conversion happens only at the checkpoint boundary.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(element_count(shape), 0.0);
    }

    static std::size_t element_count(const std::vector<int>& shape) {
        std::size_t n = 1;
        for (int d : shape) {
            n *= static_cast<std::size_t>(d);
        }
        return n;
    }

    std::size_t size() const { return data.size(); }
};

}  // namespace clic
