#pragma once

#include <stdexcept>
#include <string>

namespace sheetlab {

// Uniform dyadic-friendly grid on the unit square. Nodes sit at i/N for
// i = 0..N; a field stores a d-vector at every node.
struct GridSpec {
    int n_cells = 0;  // N: cells per axis
    int dim = 1;      // d: components per node

    GridSpec() = default;
    GridSpec(int n, int d) : n_cells(n), dim(d) { validate(); }

    void validate() const {
        if (n_cells < 1) throw std::invalid_argument("GridSpec: n_cells must be >= 1");
        if (dim < 1) throw std::invalid_argument("GridSpec: dim must be >= 1");
    }

    int n_nodes() const noexcept { return n_cells + 1; }
    double spacing() const noexcept { return 1.0 / n_cells; }
    double coord(int i) const noexcept { return static_cast<double>(i) / n_cells; }

    bool operator==(const GridSpec&) const = default;
};

}  // namespace sheetlab
