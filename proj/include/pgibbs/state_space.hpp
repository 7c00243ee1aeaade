#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pgibbs/errors.hpp"

namespace pgibbs {

// A configuration assigns a label in {0,..,q-1} to every vertex.
using Configuration = std::vector<int>;

// A partial assignment: (vertex, label) pairs.
using PartialConfiguration = std::vector<std::pair<int, int>>;

// Indexing of the product space {0,..,q-1}^n. States are numbered row-major:
// vertex 0 is the most significant digit. The same convention orders factor
// tables over their scope.
class ProductSpace {
public:
    ProductSpace(int num_vertices, int q) : n_(num_vertices), q_(q) {
        if (num_vertices < 1) throw std::invalid_argument("ProductSpace: need at least one vertex");
        if (q < 2) throw std::invalid_argument("ProductSpace: need at least two labels");
    }

    int num_vertices() const { return n_; }
    int labels() const { return q_; }

    std::size_t size() const {
        std::size_t s = 1;
        for (int i = 0; i < n_; ++i) {
            if (s > (SIZE_MAX / static_cast<std::size_t>(q_)))
                throw std::overflow_error("ProductSpace: state count overflows");
            s *= static_cast<std::size_t>(q_);
        }
        return s;
    }

    std::size_t encode(const Configuration& sigma) const {
        std::size_t idx = 0;
        for (int v = 0; v < n_; ++v) idx = idx * q_ + static_cast<std::size_t>(sigma[v]);
        return idx;
    }

    Configuration decode(std::size_t index) const {
        Configuration sigma(n_);
        for (int v = n_ - 1; v >= 0; --v) {
            sigma[v] = static_cast<int>(index % q_);
            index /= q_;
        }
        return sigma;
    }

    void decode_into(std::size_t index, Configuration& sigma) const {
        sigma.resize(n_);
        for (int v = n_ - 1; v >= 0; --v) {
            sigma[v] = static_cast<int>(index % q_);
            index /= q_;
        }
    }

    // Index of the sub-assignment sigma restricted to `verts`, row-major in
    // the order given.
    std::size_t encode_subset(const Configuration& sigma, const std::vector<int>& verts) const {
        std::size_t idx = 0;
        for (int v : verts) idx = idx * q_ + static_cast<std::size_t>(sigma[v]);
        return idx;
    }

    std::string state_label(std::size_t index) const {
        Configuration sigma = decode(index);
        std::string out;
        for (int v = 0; v < n_; ++v) {
            if (q_ > 10 && v > 0) out += '-';
            out += std::to_string(sigma[v]);
        }
        return out;
    }

    bool operator==(const ProductSpace& other) const { return n_ == other.n_ && q_ == other.q_; }

private:
    int n_;
    int q_;
};

// Row-major index of `labels` with base q (helper shared with factor tables).
inline std::size_t mixed_radix_index(const std::vector<int>& labels, int q) {
    std::size_t idx = 0;
    for (int l : labels) idx = idx * q + static_cast<std::size_t>(l);
    return idx;
}

inline std::size_t checked_pow(std::size_t base, std::size_t exp, std::size_t cap,
                               const char* what) {
    std::size_t s = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (s > cap / base) throw BudgetError(what, cap, SIZE_MAX);
        s *= base;
    }
    return s;
}

}  // namespace pgibbs
