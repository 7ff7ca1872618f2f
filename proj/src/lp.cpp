// Copyright 2026 the qbend authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qbend/lp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qbend::lp {

LinearProgram LinearProgram::with_cols(Sense sense, std::size_t ncols) {
    LinearProgram lp;
    lp.sense = sense;
    lp.objective.assign(ncols, 0.0);
    lp.lower.assign(ncols, 0.0);
    lp.upper.assign(ncols, inf());
    return lp;
}

void LinearProgram::add_row(std::vector<double> coeffs, Relation rel, double rhs_value) {
    rows.push_back(std::move(coeffs));
    relations.push_back(rel);
    rhs.push_back(rhs_value);
}

void LinearProgram::validate() const {
    const std::size_t m = rows.size();
    const std::size_t n = objective.size();
    if (rhs.size() != m || relations.size() != m)
        throw DimensionMismatch("rhs/relation count does not match row count");
    if (lower.size() != n || upper.size() != n)
        throw DimensionMismatch("bound count does not match column count");
    auto finite = [](double v) { return std::isfinite(v); };
    for (double v : objective)
        if (!finite(v)) throw DimensionMismatch("non-finite objective coefficient");
    for (double v : rhs)
        if (!finite(v)) throw DimensionMismatch("non-finite rhs entry");
    for (const auto& r : rows) {
        if (r.size() != n) throw DimensionMismatch("row length does not match column count");
        for (double v : r)
            if (!finite(v)) throw DimensionMismatch("non-finite matrix coefficient");
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (std::isnan(lower[j]) || std::isnan(upper[j]))
            throw DimensionMismatch("NaN bound");
        if (lower[j] > upper[j]) throw DimensionMismatch("lower bound exceeds upper bound");
    }
}

namespace {

// ---------------------------------------------------------------------------
// Dense LU with partial pivoting.
// ---------------------------------------------------------------------------

struct DenseLU {
    std::size_t m = 0;
    std::vector<double> lu;       // row-major, L below diag (unit), U on/above
    std::vector<std::size_t> perm;  // PA = LU; row i of PA is row perm[i] of A

    // Factors `a` (row-major m x m). Returns false on singularity.
    bool factor(const std::vector<double>& a, std::size_t dim, double zero_pivot) {
        m = dim;
        lu = a;
        perm.resize(m);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t k = 0; k < m; ++k) {
            std::size_t piv = k;
            double best = std::abs(lu[k * m + k]);
            for (std::size_t i = k + 1; i < m; ++i) {
                double v = std::abs(lu[i * m + k]);
                if (v > best) {
                    best = v;
                    piv = i;
                }
            }
            if (best <= zero_pivot) return false;
            if (piv != k) {
                for (std::size_t j = 0; j < m; ++j) std::swap(lu[k * m + j], lu[piv * m + j]);
                std::swap(perm[k], perm[piv]);
            }
            const double d = lu[k * m + k];
            for (std::size_t i = k + 1; i < m; ++i) {
                const double f = lu[i * m + k] / d;
                lu[i * m + k] = f;
                if (f != 0.0)
                    for (std::size_t j = k + 1; j < m; ++j) lu[i * m + j] -= f * lu[k * m + j];
            }
        }
        return true;
    }

    double condition_estimate() const {
        double dmax = 0.0, dmin = inf();
        for (std::size_t k = 0; k < m; ++k) {
            double d = std::abs(lu[k * m + k]);
            dmax = std::max(dmax, d);
            dmin = std::min(dmin, d);
        }
        return dmin > 0.0 ? dmax / dmin : inf();
    }

    // x := A^{-1} b
    void solve(std::vector<double>& x, const std::vector<double>& b) const {
        x.resize(m);
        for (std::size_t i = 0; i < m; ++i) x[i] = b[perm[i]];
        for (std::size_t i = 1; i < m; ++i) {
            double s = x[i];
            for (std::size_t j = 0; j < i; ++j) s -= lu[i * m + j] * x[j];
            x[i] = s;
        }
        for (std::size_t ii = m; ii-- > 0;) {
            double s = x[ii];
            for (std::size_t j = ii + 1; j < m; ++j) s -= lu[ii * m + j] * x[j];
            x[ii] = s / lu[ii * m + ii];
        }
    }

    // x := A^{-T} b
    void solve_transposed(std::vector<double>& x, const std::vector<double>& b) const {
        std::vector<double> w(b.begin(), b.end());
        // U^T w' = b (U^T is lower triangular)
        for (std::size_t i = 0; i < m; ++i) {
            double s = w[i];
            for (std::size_t j = 0; j < i; ++j) s -= lu[j * m + i] * w[j];
            w[i] = s / lu[i * m + i];
        }
        // L^T v = w' (L^T is upper triangular, unit diagonal)
        for (std::size_t ii = m; ii-- > 0;) {
            double s = w[ii];
            for (std::size_t j = ii + 1; j < m; ++j) s -= lu[j * m + ii] * w[j];
            w[ii] = s;
        }
        x.assign(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) x[perm[i]] = w[i];
    }
};

// ---------------------------------------------------------------------------
// Standard-form conversion: min c.x, A x = b, x >= 0, b >= 0.
// ---------------------------------------------------------------------------

enum class VarKind { Shifted, Negated, Split };

struct VarMap {
    VarKind kind;
    std::size_t col0;
    std::size_t col1 = 0;  // Split only
    double shift = 0.0;    // Shifted: x = x' + shift; Negated: x = shift - x'
};

struct Standardized {
    std::size_t m = 0;              // rows (original + bound rows)
    std::size_t n = 0;              // structural + slack columns
    std::vector<std::vector<double>> cols;  // column-major
    std::vector<double> b;
    std::vector<double> cost;       // internal phase-2 costs (min sense)
    double obj_const = 0.0;         // original objective constant from shifts
    double sense_sign = 1.0;        // internal cost = sense_sign * transformed c
    std::vector<double> rowflip;    // +-1 per original row
    std::vector<VarMap> vmap;
    std::size_t n_orig_rows = 0;
};

Standardized standardize(const LinearProgram& lp) {
    Standardized st;
    const std::size_t m0 = lp.num_rows();
    const std::size_t n0 = lp.num_cols();
    st.n_orig_rows = m0;
    st.sense_sign = (lp.sense == Sense::Maximize) ? -1.0 : 1.0;

    // Column transforms. `cs` holds the transformed objective coefficient of
    // each internal structural column; `rowadd` the extra upper-bound rows.
    struct BoundRow {
        std::size_t col;
        double rhs;
    };
    std::vector<BoundRow> bound_rows;
    std::vector<double> cs;
    // transformed row coefficients are derived on the fly from vmap
    st.vmap.reserve(n0);
    std::size_t ncol = 0;
    for (std::size_t j = 0; j < n0; ++j) {
        const double lo = lp.lower[j], up = lp.upper[j];
        const double cj = lp.objective[j];
        if (std::isfinite(lo)) {
            st.vmap.push_back({VarKind::Shifted, ncol, 0, lo});
            cs.push_back(cj);
            st.obj_const += cj * lo;
            if (std::isfinite(up)) bound_rows.push_back({ncol, up - lo});
            ++ncol;
        } else if (std::isfinite(up)) {
            st.vmap.push_back({VarKind::Negated, ncol, 0, up});
            cs.push_back(-cj);
            st.obj_const += cj * up;
            ++ncol;
        } else {
            st.vmap.push_back({VarKind::Split, ncol, ncol + 1, 0.0});
            cs.push_back(cj);
            cs.push_back(-cj);
            ncol += 2;
        }
    }

    const std::size_t m = m0 + bound_rows.size();
    st.m = m;

    // Structural part, row-major scratch first.
    std::vector<std::vector<double>> mat(m, std::vector<double>(ncol, 0.0));
    st.b.assign(m, 0.0);
    std::vector<int> slack_dir(m, 0);  // +1 slack, -1 surplus, 0 none
    for (std::size_t i = 0; i < m0; ++i) {
        double bi = lp.rhs[i];
        for (std::size_t j = 0; j < n0; ++j) {
            const double a = lp.rows[i][j];
            if (a == 0.0) continue;
            const VarMap& vm = st.vmap[j];
            switch (vm.kind) {
                case VarKind::Shifted:
                    mat[i][vm.col0] += a;
                    bi -= a * vm.shift;
                    break;
                case VarKind::Negated:
                    mat[i][vm.col0] -= a;
                    bi -= a * vm.shift;
                    break;
                case VarKind::Split:
                    mat[i][vm.col0] += a;
                    mat[i][vm.col1] -= a;
                    break;
            }
        }
        st.b[i] = bi;
        slack_dir[i] = lp.relations[i] == Relation::LessEq    ? 1
                       : lp.relations[i] == Relation::GreaterEq ? -1
                                                                : 0;
    }
    for (std::size_t k = 0; k < bound_rows.size(); ++k) {
        const std::size_t i = m0 + k;
        mat[i][bound_rows[k].col] = 1.0;
        st.b[i] = bound_rows[k].rhs;
        slack_dir[i] = 1;
    }

    // Slack columns, then flip rows so b >= 0.
    std::size_t nslack = 0;
    std::vector<std::size_t> slack_col(m, SIZE_MAX);
    for (std::size_t i = 0; i < m; ++i)
        if (slack_dir[i] != 0) slack_col[i] = ncol + nslack++;
    st.n = ncol + nslack;

    st.rowflip.assign(m, 1.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (st.b[i] < 0.0) {
            st.rowflip[i] = -1.0;
            st.b[i] = -st.b[i];
            for (auto& v : mat[i]) v = -v;
            slack_dir[i] = -slack_dir[i];
        }
    }

    st.cols.assign(st.n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < ncol; ++j)
            if (mat[i][j] != 0.0) st.cols[j][i] = mat[i][j];
        if (slack_col[i] != SIZE_MAX) st.cols[slack_col[i]][i] = static_cast<double>(slack_dir[i]);
    }

    st.cost.assign(st.n, 0.0);
    for (std::size_t j = 0; j < ncol; ++j) st.cost[j] = st.sense_sign * cs[j];
    return st;
}

// ---------------------------------------------------------------------------
// Revised simplex on the standardized problem. Artificial columns are the
// identity, indexed n .. n+m-1.
// ---------------------------------------------------------------------------

constexpr int kRefactorInterval = 50;
constexpr int kMaxPivots = 200000;
constexpr double kCondLimit = 1e12;

struct Eta {
    std::size_t r;
    std::vector<double> v;
};

class Simplex {
  public:
    Simplex(const Standardized& st, const ToleranceSet& tol) : st_(st), tol_(tol) {
        m_ = st.m;
        n_ = st.n;
        basis_.resize(m_);
        std::iota(basis_.begin(), basis_.end(), n_);  // artificial basis
        xb_ = st.b;
        refactor();
    }

    enum class Outcome { Optimal, Unbounded };

    // Runs Bland-rule iterations with the given costs over the allowed
    // columns. On Unbounded, `ray_col`/`ray_w` describe the direction.
    Outcome iterate(const std::vector<double>& cost, bool allow_artificials) {
        std::vector<double> y, w;
        for (;;) {
            if (++total_iters_ > kMaxPivots)
                throw NumericalBreakdown("pivot limit exceeded");
            btran(y, basis_cost(cost));
            // Bland: lowest-index improving column.
            std::size_t enter = SIZE_MAX;
            const std::size_t limit = allow_artificials ? n_ + m_ : n_;
            for (std::size_t j = 0; j < limit; ++j) {
                if (in_basis_[j]) continue;
                const double red = cost[j] - dot_col(y, j);
                if (red < -1e-9) {
                    enter = j;
                    break;
                }
            }
            if (enter == SIZE_MAX) return Outcome::Optimal;
            ftran(w, enter);
            // Ratio test, Bland tie-break on leaving variable index.
            std::size_t leave = SIZE_MAX;
            double theta = inf();
            for (std::size_t i = 0; i < m_; ++i) {
                if (w[i] > tol_.zero_pivot) {
                    const double t = std::max(xb_[i], 0.0) / w[i];
                    if (t < theta - 1e-12 ||
                        (t < theta + 1e-12 &&
                         (leave == SIZE_MAX || basis_[i] < basis_[leave]))) {
                        theta = t;
                        leave = i;
                    }
                }
            }
            if (leave == SIZE_MAX) {
                ray_col_ = enter;
                ray_w_ = w;
                return Outcome::Unbounded;
            }
            for (std::size_t i = 0; i < m_; ++i) xb_[i] -= theta * w[i];
            xb_[leave] = theta;
            for (std::size_t i = 0; i < m_; ++i)
                if (xb_[i] < 0.0) xb_[i] = 0.0;
            in_basis_[basis_[leave]] = false;
            in_basis_[enter] = true;
            basis_[leave] = enter;
            etas_.push_back({leave, w});
            if (static_cast<int>(etas_.size()) >= kRefactorInterval) refactor();
        }
    }

    // Degenerate pivots removing artificials from the basis where possible.
    void drive_out_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            std::vector<double> w;
            bool pivoted = false;
            for (std::size_t j = 0; j < n_ && !pivoted; ++j) {
                if (in_basis_[j]) continue;
                ftran(w, j);
                if (std::abs(w[i]) > 1e-7) {
                    in_basis_[basis_[i]] = false;
                    in_basis_[j] = true;
                    basis_[i] = j;
                    etas_.push_back({i, w});
                    refactor();
                    pivoted = true;
                }
            }
        }
    }

    double objective(const std::vector<double>& cost) const {
        double s = 0.0;
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < cost.size()) s += cost[basis_[i]] * xb_[i];
        return s;
    }

    double artificial_mass() const {
        double s = 0.0;
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= n_) s += xb_[i];
        return s;
    }

    std::vector<double> primal() const {
        std::vector<double> x(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_) x[basis_[i]] = xb_[i];
        return x;
    }

    std::vector<double> duals(const std::vector<double>& cost) {
        std::vector<double> y;
        btran(y, basis_cost(cost));
        return y;
    }

    // Internal improving ray after an Unbounded outcome: d[enter] = 1,
    // d[basis[i]] = -w[i].
    std::vector<double> unbounded_ray() const {
        std::vector<double> d(n_, 0.0);
        if (ray_col_ < n_) d[ray_col_] = 1.0;
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_) d[basis_[i]] = -ray_w_[i];
        return d;
    }

    int iterations() const { return total_iters_; }

  private:
    std::vector<double> basis_cost(const std::vector<double>& cost) const {
        std::vector<double> cb(m_);
        for (std::size_t i = 0; i < m_; ++i)
            cb[i] = basis_[i] < cost.size() ? cost[basis_[i]] : 0.0;
        return cb;
    }

    double dot_col(const std::vector<double>& y, std::size_t j) const {
        if (j >= n_) return y[j - n_];  // artificial = e_i
        const auto& col = st_.cols[j];
        double s = 0.0;
        for (std::size_t i = 0; i < m_; ++i) s += y[i] * col[i];
        return s;
    }

    void column(std::vector<double>& out, std::size_t j) const {
        out.assign(m_, 0.0);
        if (j >= n_)
            out[j - n_] = 1.0;
        else
            out = st_.cols[j];
    }

    // w := B^{-1} a_j through LU then the eta file.
    void ftran(std::vector<double>& w, std::size_t j) const {
        std::vector<double> a;
        column(a, j);
        lu_.solve(w, a);
        for (const auto& e : etas_) {
            const double wr = w[e.r] / e.v[e.r];
            for (std::size_t i = 0; i < m_; ++i)
                if (i != e.r) w[i] -= e.v[i] * wr;
            w[e.r] = wr;
        }
    }

    // y := B^{-T} c through the eta file (reverse) then LU.
    void btran(std::vector<double>& y, const std::vector<double>& cb) const {
        std::vector<double> z = cb;
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double s = z[it->r];
            for (std::size_t i = 0; i < m_; ++i)
                if (i != it->r) s -= it->v[i] * z[i];
            z[it->r] = s / it->v[it->r];
        }
        lu_.solve_transposed(y, z);
    }

    void refactor() {
        std::vector<double> bmat(m_ * m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            std::vector<double> col;
            column(col, basis_[i]);
            for (std::size_t r = 0; r < m_; ++r) bmat[r * m_ + i] = col[r];
        }
        if (!lu_.factor(bmat, m_, tol_.zero_pivot))
            throw NumericalBreakdown("singular basis matrix");
        if (lu_.condition_estimate() > kCondLimit)
            throw NumericalBreakdown("basis condition estimate exceeds 1e12");
        etas_.clear();
        lu_.solve(xb_, st_.b);  // refresh against drift
        for (std::size_t i = 0; i < m_; ++i)
            if (xb_[i] < 0.0 && xb_[i] > -1e-7) xb_[i] = 0.0;
        in_basis_.assign(n_ + m_, false);
        for (std::size_t i = 0; i < m_; ++i) in_basis_[basis_[i]] = true;
    }

    const Standardized& st_;
    ToleranceSet tol_;
    std::size_t m_ = 0, n_ = 0;
    std::vector<std::size_t> basis_;
    std::vector<bool> in_basis_;
    std::vector<double> xb_;
    DenseLU lu_;
    std::vector<Eta> etas_;
    std::size_t ray_col_ = SIZE_MAX;
    std::vector<double> ray_w_;
    int total_iters_ = 0;
};

std::vector<double> map_primal_back(const Standardized& st, const std::vector<double>& x) {
    std::vector<double> out(st.vmap.size());
    for (std::size_t j = 0; j < st.vmap.size(); ++j) {
        const VarMap& vm = st.vmap[j];
        switch (vm.kind) {
            case VarKind::Shifted: out[j] = x[vm.col0] + vm.shift; break;
            case VarKind::Negated: out[j] = vm.shift - x[vm.col0]; break;
            case VarKind::Split: out[j] = x[vm.col0] - x[vm.col1]; break;
        }
    }
    return out;
}

std::vector<double> map_ray_back(const Standardized& st, const std::vector<double>& d) {
    std::vector<double> out(st.vmap.size());
    for (std::size_t j = 0; j < st.vmap.size(); ++j) {
        const VarMap& vm = st.vmap[j];
        switch (vm.kind) {
            case VarKind::Shifted: out[j] = d[vm.col0]; break;
            case VarKind::Negated: out[j] = -d[vm.col0]; break;
            case VarKind::Split: out[j] = d[vm.col0] - d[vm.col1]; break;
        }
    }
    return out;
}

void normalize_inf(std::vector<double>& v) {
    double mx = 0.0;
    for (double x : v) mx = std::max(mx, std::abs(x));
    if (mx > 0.0)
        for (double& x : v) x /= mx;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const ToleranceSet& tol) {
    lp.validate();
    LpSolution sol;
    if (lp.num_rows() == 0 && lp.num_cols() == 0) {
        sol.status = LpStatus::Optimal;
        return sol;
    }

    Standardized st = standardize(lp);

    if (st.m == 0) {
        // No constraints: optimal at the (shifted) origin unless some cost is
        // improving, in which case unbounded.
        sol.primal = map_primal_back(st, std::vector<double>(st.n, 0.0));
        sol.objective = st.obj_const;
        for (std::size_t j = 0; j < st.n; ++j) {
            if (st.cost[j] < -tol.zero_pivot) {
                sol.status = LpStatus::Unbounded;
                std::vector<double> d(st.n, 0.0);
                d[j] = 1.0;
                sol.ray = map_ray_back(st, d);
                normalize_inf(sol.ray);
                return sol;
            }
        }
        sol.status = LpStatus::Optimal;
        sol.dual.assign(lp.num_rows(), 0.0);
        return sol;
    }

    Simplex sx(st, tol);

    // Phase 1.
    std::vector<double> phase1_cost(st.n + st.m, 0.0);
    for (std::size_t j = st.n; j < st.n + st.m; ++j) phase1_cost[j] = 1.0;
    sx.iterate(phase1_cost, /*allow_artificials=*/true);

    double bnorm = 0.0;
    for (double v : st.b) bnorm = std::max(bnorm, std::abs(v));
    if (sx.artificial_mass() > tol.feas_tol * (1.0 + bnorm)) {
        sol.status = LpStatus::Infeasible;
        sol.iterations = sx.iterations();
        std::vector<double> y = sx.duals(phase1_cost);
        sol.ray.assign(st.n_orig_rows, 0.0);
        for (std::size_t i = 0; i < st.n_orig_rows; ++i) sol.ray[i] = -y[i] * st.rowflip[i];
        normalize_inf(sol.ray);
        return sol;
    }

    sx.drive_out_artificials();

    // Phase 2.
    std::vector<double> phase2_cost = st.cost;  // artificials priced out
    auto outcome = sx.iterate(phase2_cost, /*allow_artificials=*/false);
    sol.iterations = sx.iterations();

    if (outcome == Simplex::Outcome::Unbounded) {
        sol.status = LpStatus::Unbounded;
        sol.ray = map_ray_back(st, sx.unbounded_ray());
        normalize_inf(sol.ray);
        return sol;
    }

    sol.status = LpStatus::Optimal;
    sol.primal = map_primal_back(st, sx.primal());
    sol.objective = st.sense_sign * sx.objective(phase2_cost) + st.obj_const;
    std::vector<double> y = sx.duals(phase2_cost);
    sol.dual.assign(st.n_orig_rows, 0.0);
    const double s = st.sense_sign;
    for (std::size_t i = 0; i < st.n_orig_rows; ++i) sol.dual[i] = s * st.rowflip[i] * y[i];
    return sol;
}

LinearProgram dual_of(const LinearProgram& lp) {
    lp.validate();
    const std::size_t m = lp.num_rows();
    const std::size_t n = lp.num_cols();
    for (std::size_t j = 0; j < n; ++j)
        if (lp.lower[j] != 0.0 || std::isfinite(lp.upper[j]))
            throw UnsupportedForm("dual_of requires plain nonnegative variables");

    const bool primal_max = lp.sense == Sense::Maximize;
    for (Relation r : lp.relations) {
        if (r == Relation::Equal)
            throw UnsupportedForm("dual_of requires inequality rows (pre-split equalities)");
        if (primal_max && r != Relation::LessEq)
            throw UnsupportedForm("max-sense primal must use <= rows");
        if (!primal_max && r != Relation::GreaterEq)
            throw UnsupportedForm("min-sense primal must use >= rows");
    }

    LinearProgram d = LinearProgram::with_cols(primal_max ? Sense::Minimize : Sense::Maximize, m);
    d.objective = lp.rhs;
    d.rows.assign(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) d.rows[j][i] = lp.rows[i][j];
    d.relations.assign(n, primal_max ? Relation::GreaterEq : Relation::LessEq);
    d.rhs = lp.objective;
    return d;
}

}  // namespace qbend::lp
