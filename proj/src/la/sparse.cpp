#include "aimm/la/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace aimm {

CsrMatrix CsrMatrix::from_pattern(std::vector<std::vector<int>> rows) {
    CsrMatrix m;
    m.n_ = static_cast<int>(rows.size());
    m.offsets_.resize(m.n_ + 1);
    m.offsets_[0] = 0;
    std::size_t nnz = 0;
    for (int r = 0; r < m.n_; ++r) {
        nnz += rows[r].size();
        m.offsets_[r + 1] = static_cast<int>(nnz);
    }
    m.cols_.reserve(nnz);
    for (int r = 0; r < m.n_; ++r) {
        for (std::size_t k = 0; k + 1 < rows[r].size(); ++k)
            if (rows[r][k] >= rows[r][k + 1]) throw Error("pattern rows must be sorted unique");
        for (int c : rows[r]) {
            if (c < 0 || c >= m.n_) throw Error("pattern column out of range");
            m.cols_.push_back(c);
        }
    }
    m.vals_.assign(nnz, 0.0);
    return m;
}

void CsrMatrix::set_zero() { std::fill(vals_.begin(), vals_.end(), 0.0); }

int CsrMatrix::find(int r, int c) const {
    const int* first = cols_.data() + offsets_[r];
    const int* last = cols_.data() + offsets_[r + 1];
    const int* it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return -1;
    return static_cast<int>(it - cols_.data());
}

void CsrMatrix::add(int r, int c, double v) {
    int k = find(r, c);
    if (k < 0) throw IndexOutOfPattern(r, c);
    vals_[k] += v;
}

void CsrMatrix::set(int r, int c, double v) {
    int k = find(r, c);
    if (k < 0) throw IndexOutOfPattern(r, c);
    vals_[k] = v;
}

double CsrMatrix::get(int r, int c) const {
    int k = find(r, c);
    return k < 0 ? 0.0 : vals_[k];
}

void CsrMatrix::matvec(const std::vector<double>& x, std::vector<double>& y) const {
    y.resize(n_);
    for (int r = 0; r < n_; ++r) {
        double s = 0.0;
        for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) s += vals_[k] * x[cols_[k]];
        y[r] = s;
    }
}

std::vector<double> CsrMatrix::matvec(const std::vector<double>& x) const {
    std::vector<double> y;
    matvec(x, y);
    return y;
}

Assembler::Assembler(int n_dofs, const std::vector<std::vector<int>>& dof_lists) : n_(n_dofs) {
    pattern_.assign(n_, {});
    for (const auto& dofs : dof_lists) {
        for (int i : dofs) {
            if (i < 0 || i >= n_) throw Error("assembler: dof index out of range");
            for (int j : dofs) pattern_[i].push_back(j);
        }
    }
    for (auto& row : pattern_) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    offs_.push_back(0);
    val_offs_.push_back(0);
}

void Assembler::begin() {
    offs_.assign(1, 0);
    val_offs_.assign(1, 0);
    dofs_.clear();
    sig_.clear();
    vals_.clear();
    has_mat_.clear();
    has_rhs_.clear();
}

void Assembler::add(std::span<const int> dofs, std::span<const double> local_mat,
                    std::span<const double> local_rhs) {
    const std::size_t nd = dofs.size();
    if (!local_mat.empty() && local_mat.size() != nd * nd)
        throw Error("assembler: local matrix size mismatch");
    if (!local_rhs.empty() && local_rhs.size() != nd)
        throw Error("assembler: local rhs size mismatch");
    dofs_.insert(dofs_.end(), dofs.begin(), dofs.end());
    std::size_t s0 = sig_.size();
    sig_.insert(sig_.end(), dofs.begin(), dofs.end());
    std::sort(sig_.begin() + s0, sig_.end());
    vals_.insert(vals_.end(), local_mat.begin(), local_mat.end());
    vals_.insert(vals_.end(), local_rhs.begin(), local_rhs.end());
    offs_.push_back(static_cast<int>(dofs_.size()));
    val_offs_.push_back(vals_.size());
    has_mat_.push_back(local_mat.empty() ? 0 : 1);
    has_rhs_.push_back(local_rhs.empty() ? 0 : 1);
}

void Assembler::finalize(CsrMatrix& A, std::vector<double>& b) const {
    const int nc = static_cast<int>(has_mat_.size());
    // Order contributions by their sorted dof signature so the floating-point
    // reduction order does not depend on the order add() was called in. Ties
    // (identical signatures) are broken by the raw dof list and then by the
    // numeric payload, which makes the order a pure function of the content.
    std::vector<int> order(nc);
    std::iota(order.begin(), order.end(), 0);
    auto cmp_range = [](const auto* a0, const auto* a1, const auto* b0, const auto* b1) {
        return std::lexicographical_compare(a0, a1, b0, b1) ? -1
               : std::lexicographical_compare(b0, b1, a0, a1) ? 1
                                                              : 0;
    };
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        int c = cmp_range(sig_.data() + offs_[a], sig_.data() + offs_[a + 1],
                          sig_.data() + offs_[b], sig_.data() + offs_[b + 1]);
        if (c != 0) return c < 0;
        c = cmp_range(dofs_.data() + offs_[a], dofs_.data() + offs_[a + 1],
                      dofs_.data() + offs_[b], dofs_.data() + offs_[b + 1]);
        if (c != 0) return c < 0;
        c = cmp_range(vals_.data() + val_offs_[a], vals_.data() + val_offs_[a + 1],
                      vals_.data() + val_offs_[b], vals_.data() + val_offs_[b + 1]);
        return c < 0;
    });

    if (A.n() != n_) A = make_matrix();
    A.set_zero();
    b.assign(n_, 0.0);
    for (int c : order) {
        const int* d = dofs_.data() + offs_[c];
        const int nd = offs_[c + 1] - offs_[c];
        const double* v = vals_.data() + val_offs_[c];
        if (has_mat_[c]) {
            for (int i = 0; i < nd; ++i)
                for (int j = 0; j < nd; ++j) A.add(d[i], d[j], v[i * nd + j]);
            v += nd * nd;
        }
        if (has_rhs_[c])
            for (int i = 0; i < nd; ++i) b[d[i]] += v[i];
    }
}

CsrMatrix Assembler::make_matrix() const { return CsrMatrix::from_pattern(pattern_); }

void apply_dirichlet(CsrMatrix& A, std::vector<double>& b,
                     const std::vector<std::pair<int, double>>& constraints, bool symmetric) {
    const int n = A.n();
    std::vector<char> fixed(n, 0);
    std::vector<double> value(n, 0.0);
    for (const auto& [dof, v] : constraints) {
        if (dof < 0 || dof >= n) throw Error("apply_dirichlet: dof out of range");
        if (fixed[dof]) {
            double scale = std::max({1.0, std::abs(v), std::abs(value[dof])});
            if (std::abs(v - value[dof]) > 1e-12 * scale)
                throw ConflictingConstraint(dof, value[dof], v);
            continue;
        }
        fixed[dof] = 1;
        value[dof] = v;
    }

    auto& vals = A.values();
    const auto& offsets = A.offsets();
    const auto& cols = A.cols();
    if (symmetric) {
        for (int r = 0; r < n; ++r) {
            if (fixed[r]) continue;
            for (int k = offsets[r]; k < offsets[r + 1]; ++k) {
                int c = cols[k];
                if (fixed[c]) {
                    b[r] -= vals[k] * value[c];
                    vals[k] = 0.0;
                }
            }
        }
    }
    for (int r = 0; r < n; ++r) {
        if (!fixed[r]) continue;
        for (int k = offsets[r]; k < offsets[r + 1]; ++k) vals[k] = (cols[k] == r) ? 1.0 : 0.0;
        if (A.find(r, r) < 0) throw Error("apply_dirichlet: diagonal entry missing from pattern");
        b[r] = value[r];
    }
}

void write_matrix_market(std::ostream& out, const CsrMatrix& A) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << A.n() << " " << A.n() << " " << A.nnz() << "\n";
    out << std::setprecision(17);
    for (int r = 0; r < A.n(); ++r)
        for (int k = A.offsets()[r]; k < A.offsets()[r + 1]; ++k)
            out << r + 1 << " " << A.cols()[k] + 1 << " " << A.values()[k] << "\n";
}

void write_matrix_market_file(const std::string& path, const CsrMatrix& A) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open matrix file for writing: " + path);
    write_matrix_market(out, A);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double nrm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scal(double alpha, std::vector<double>& x) {
    for (double& v : x) v *= alpha;
}

}  // namespace aimm
