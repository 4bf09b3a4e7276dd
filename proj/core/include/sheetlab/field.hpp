#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "sheetlab/grid.hpp"

namespace sheetlab {

// d-dimensional plane field sampled on the nodes of a GridSpec. Raw samples
// of the driving random field vanish on both axes; derived fields (solutions,
// differences, reversals) reuse the same container.
class SheetField {
  public:
    SheetField() = default;
    explicit SheetField(GridSpec grid)
        : grid_(grid), values_(static_cast<std::size_t>(grid.n_nodes()) * grid.n_nodes() * grid.dim, 0.0) {}

    const GridSpec& grid() const noexcept { return grid_; }
    int n_cells() const noexcept { return grid_.n_cells; }
    int dim() const noexcept { return grid_.dim; }

    std::size_t index(int i, int j, int c = 0) const noexcept {
        return (static_cast<std::size_t>(i) * grid_.n_nodes() + j) * grid_.dim + c;
    }
    double value(int i, int j, int c = 0) const noexcept { return values_[index(i, j, c)]; }
    double& value(int i, int j, int c = 0) noexcept { return values_[index(i, j, c)]; }
    std::span<const double> at(int i, int j) const noexcept {
        return {values_.data() + index(i, j), static_cast<std::size_t>(grid_.dim)};
    }
    std::span<double> at(int i, int j) noexcept {
        return {values_.data() + index(i, j), static_cast<std::size_t>(grid_.dim)};
    }
    std::span<const double> raw() const noexcept { return values_; }
    std::span<double> raw() noexcept { return values_; }

    // Seed used to generate this field; empty for derived or loaded fields.
    std::optional<std::uint64_t> seed;

  private:
    GridSpec grid_;
    std::vector<double> values_;
};

// Prescribed values of a solution on the two coordinate axes. left[j] is the
// trace at (0, t_j), bottom[i] at (s_i, 0); the corner value is shared.
struct BoundaryTrace {
    int dim = 1;
    std::vector<double> left;    // (N+1) * dim
    std::vector<double> bottom;  // (N+1) * dim

    static BoundaryTrace zero(const GridSpec& g);
    static BoundaryTrace constant(const GridSpec& g, double v);

    double left_at(int j, int c) const noexcept { return left[static_cast<std::size_t>(j) * dim + c]; }
    double bottom_at(int i, int c) const noexcept { return bottom[static_cast<std::size_t>(i) * dim + c]; }
    void validate(const GridSpec& g) const;
};

// Draws one sample of the driving field: i.i.d. centred Gaussian cell
// increments with variance equal to the cell area, accumulated to nodes.
SheetField generate_sheet(const GridSpec& grid, std::uint64_t seed);

// Increment over the closed rectangle [s_{i0}, s_{i1}] x [t_{j0}, t_{j1}].
std::vector<double> rectangle_increment(const SheetField& f, int i0, int j0, int i1, int j1);

// Reflection t -> 1 - t of the second coordinate (node permutation, exact).
SheetField time_reverse(const SheetField& f);

// sup over nodes of the Euclidean norm of the d-vector.
double sup_norm(const SheetField& f);

// Keeps every factor-th node; factor must divide n_cells.
SheetField restrict_field(const SheetField& f, int factor);

// CSV persistence: header "s,t,x0,..,x{d-1}", one node per row, row-major in
// i then j, shortest round-trip decimal formatting.
void write_csv(const SheetField& f, const std::filesystem::path& path);
SheetField read_csv(const std::filesystem::path& path);

// In-place prefix sum with pairwise (tree) association; keeps the rounding
// error of long accumulations at O(log n) ulp instead of O(n).
void pairwise_prefix(double* data, std::size_t n, std::size_t stride);

// Pairwise (tree) total of a contiguous buffer.
double pairwise_sum(const double* data, std::size_t n);

}  // namespace sheetlab
