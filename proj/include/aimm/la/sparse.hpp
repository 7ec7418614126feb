#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aimm/core/errors.hpp"

namespace aimm {

// Square sparse matrix in compressed row storage. Column indices are sorted
// and unique within each row; the pattern is fixed after construction and
// add() refuses entries outside it.
class CsrMatrix {
  public:
    CsrMatrix() = default;

    // rows[i] must be sorted and duplicate-free.
    static CsrMatrix from_pattern(std::vector<std::vector<int>> rows);

    int n() const { return n_; }
    int nnz() const { return static_cast<int>(cols_.size()); }

    const std::vector<int>& offsets() const { return offsets_; }
    const std::vector<int>& cols() const { return cols_; }
    const std::vector<double>& values() const { return vals_; }
    std::vector<double>& values() { return vals_; }

    void set_zero();

    // position of (r, c) in the value array, or -1 if outside the pattern
    int find(int r, int c) const;
    void add(int r, int c, double v);
    void set(int r, int c, double v);
    double get(int r, int c) const;  // 0 outside the pattern

    void matvec(const std::vector<double>& x, std::vector<double>& y) const;
    std::vector<double> matvec(const std::vector<double>& x) const;

  private:
    int n_ = 0;
    std::vector<int> offsets_;
    std::vector<int> cols_;
    std::vector<double> vals_;
};

// Accumulates dense element contributions and commits them to a CSR matrix
// and right-hand side in an order fixed by the dof indices (not the order the
// contributions arrived in), so the assembled system is bit-identical under
// any permutation of the element list.
class Assembler {
  public:
    // The pattern is the union of all dof-list cliques; build it once per
    // mesh and reuse the assembler across nonlinear iterations.
    Assembler(int n_dofs, const std::vector<std::vector<int>>& dof_lists);

    int n_dofs() const { return n_; }

    void begin();

    // local_mat is row-major ndofs x ndofs; either span may be empty.
    void add(std::span<const int> dofs, std::span<const double> local_mat,
             std::span<const double> local_rhs);

    // Sorted scatter-add into A (pattern must match the constructor's) and b.
    void finalize(CsrMatrix& A, std::vector<double>& b) const;

    // Fresh zero matrix with this assembler's pattern.
    CsrMatrix make_matrix() const;

  private:
    int n_ = 0;
    std::vector<std::vector<int>> pattern_;
    // contribution arena
    std::vector<int> offs_;       // start into dofs_ per contribution (+1 sentinel)
    std::vector<int> dofs_;       // flat dof lists
    std::vector<int> sig_;        // flat sorted dof lists (same layout)
    std::vector<std::size_t> val_offs_;
    std::vector<double> vals_;    // flat: matrix block then rhs block
    std::vector<char> has_mat_, has_rhs_;
};

// Imposes x[dof] = value. Constrained rows become identity rows with the
// value on the rhs. With symmetric = true the matching columns are moved to
// the rhs as well so a symmetric matrix stays symmetric. Repeated
// constraints must agree to within 1e-12 (relative to the larger value).
void apply_dirichlet(CsrMatrix& A, std::vector<double>& b,
                     const std::vector<std::pair<int, double>>& constraints,
                     bool symmetric = false);

// MatrixMarket coordinate format (1-based), for offline debugging.
void write_matrix_market(std::ostream& out, const CsrMatrix& A);
void write_matrix_market_file(const std::string& path, const CsrMatrix& A);

// small dense-vector helpers used throughout the solvers
double dot(const std::vector<double>& a, const std::vector<double>& b);
double nrm2(const std::vector<double>& a);
void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y);  // y += alpha x
void scal(double alpha, std::vector<double>& x);

}  // namespace aimm
