#include "linereconf/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "linereconf/error.hpp"

namespace linereconf {

int LinearProgram::add_variable(double lb, double ub, double c) {
    if (!std::isfinite(lb)) throw Error(ErrorKind::InvalidArgument, "variable lower bound must be finite");
    if (ub < lb) throw Error(ErrorKind::InvalidArgument, "variable upper bound below lower bound");
    cost.push_back(c);
    lower.push_back(lb);
    upper.push_back(ub);
    return static_cast<int>(cost.size()) - 1;
}

void LinearProgram::add_row(std::vector<std::pair<int, double>> coeffs, RowSense sense, double rhs) {
    for (const auto& [var, _] : coeffs)
        if (var < 0 || static_cast<std::size_t>(var) >= cost.size())
            throw Error(ErrorKind::InvalidArgument, "row references unknown variable");
    rows.push_back({std::move(coeffs), sense, rhs});
}

double LinearProgram::objective(const std::vector<double>& x) const {
    double v = objective_offset;
    for (std::size_t j = 0; j < cost.size(); ++j) v += cost[j] * x[j];
    return v;
}

double LinearProgram::max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < cost.size(); ++j) {
        worst = std::max(worst, lower[j] - x[j]);
        if (std::isfinite(upper[j])) worst = std::max(worst, x[j] - upper[j]);
    }
    for (const auto& row : rows) {
        double lhs = 0.0;
        for (const auto& [var, a] : row.coeffs) lhs += a * x[var];
        switch (row.sense) {
        case RowSense::LessEqual: worst = std::max(worst, lhs - row.rhs); break;
        case RowSense::GreaterEqual: worst = std::max(worst, row.rhs - lhs); break;
        case RowSense::Equal: worst = std::max(worst, std::abs(lhs - row.rhs)); break;
        }
    }
    return worst;
}

namespace {

constexpr double kPivotTol = 1e-7;
constexpr double kHarrisTol = 1e-9;
constexpr int kRefactorInterval = 50;
constexpr double kCostTol = 1e-9;
constexpr double kPhaseOneTol = 1e-8;
constexpr double kFeasTol = 1e-7;

// Tableau form of the LP after shifting every variable to [0, ub - lb] and
// adding one slack per inequality and one artificial per row.
class Simplex {
public:
    explicit Simplex(const LinearProgram& lp) : lp_(lp) {
        n_ = lp.num_variables();
        m_ = lp.rows.size();
        std::size_t slacks = 0;
        for (const auto& r : lp.rows)
            if (r.sense != RowSense::Equal) ++slacks;
        first_art_ = n_ + slacks;
        cols_ = first_art_ + m_;
        tab_.assign(m_ * cols_, 0.0);
        ub_.assign(cols_, kInfinity);
        cost_.assign(cols_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            ub_[j] = lp.upper[j] - lp.lower[j];
            cost_[j] = lp.cost[j];
        }
        xb_.assign(m_, 0.0);
        basis_.assign(m_, 0);
        is_basic_.assign(cols_, false);
        at_upper_.assign(cols_, false);

        std::size_t slack = n_;
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& row = lp.rows[i];
            double r = row.rhs;
            for (const auto& [var, a] : row.coeffs) {
                at(i, var) += a;
                r -= a * lp.lower[var];
            }
            if (row.sense == RowSense::LessEqual) at(i, slack++) = 1.0;
            if (row.sense == RowSense::GreaterEqual) at(i, slack++) = -1.0;
            if (r < 0.0) {
                for (std::size_t j = 0; j < first_art_; ++j) at(i, j) = -at(i, j);
                r = -r;
            }
            at(i, first_art_ + i) = 1.0;
            basis_[i] = first_art_ + i;
            is_basic_[first_art_ + i] = true;
            xb_[i] = r;
        }
        a0_ = tab_;
        r0_ = xb_;
    }

    LpResult solve() {
        LpResult result;
        // Phase 1: minimize the sum of artificials.
        d_.assign(cols_, 0.0);
        for (std::size_t j = 0; j < first_art_; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < m_; ++i) s += at(i, j);
            d_[j] = -s;
        }
        phase_one_ = true;
        if (!iterate()) throw Error(ErrorKind::NumericalFailure, "phase one reported unbounded");
        double infeas = 0.0;
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= first_art_) infeas += xb_[i];
        if (infeas > kPhaseOneTol * (1.0 + rhs_scale())) {
            result.status = LpStatus::Infeasible;
            result.iterations = iterations_;
            return result;
        }
        drive_out_artificials();
        for (std::size_t j = first_art_; j < cols_; ++j) ub_[j] = 0.0;

        // Phase 2.
        phase_one_ = false;
        bland_ = false;
        degenerate_ = 0;
        for (std::size_t j = 0; j < cols_; ++j) {
            double s = cost_[j];
            for (std::size_t i = 0; i < m_; ++i) s -= cost_[basis_[i]] * at(i, j);
            d_[j] = is_basic_[j] ? 0.0 : s;
        }
        if (!iterate()) {
            result.status = LpStatus::Unbounded;
            result.iterations = iterations_;
            return result;
        }

        result.status = LpStatus::Optimal;
        result.iterations = iterations_;
        result.x.assign(n_, 0.0);
        for (std::size_t j = 0; j < n_; ++j)
            result.x[j] = lp_.lower[j] + (at_upper_[j] ? ub_[j] : 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_) result.x[basis_[i]] = lp_.lower[basis_[i]] + xb_[i];
        for (std::size_t j = 0; j < n_; ++j) {
            result.x[j] = std::max(result.x[j], lp_.lower[j]);
            if (std::isfinite(lp_.upper[j])) result.x[j] = std::min(result.x[j], lp_.upper[j]);
        }
        const double viol = lp_.max_violation(result.x);
        if (viol > kFeasTol * (1.0 + rhs_scale()))
            throw Error(ErrorKind::NumericalFailure,
                        "simplex solution violates constraints by " + std::to_string(viol));
        result.objective = lp_.objective(result.x);
        return result;
    }

private:
    double& at(std::size_t i, std::size_t j) { return tab_[i * cols_ + j]; }
    double at(std::size_t i, std::size_t j) const { return tab_[i * cols_ + j]; }

    double rhs_scale() const {
        double s = 0.0;
        for (const auto& r : lp_.rows) s = std::max(s, std::abs(r.rhs));
        return s;
    }

    double nonbasic_value(std::size_t j) const { return at_upper_[j] ? ub_[j] : 0.0; }

    // Returns false if unbounded.
    bool iterate() {
        const long limit = 50L * static_cast<long>(m_ + cols_) + 1000;
        while (true) {
            auto q = choose_entering();
            if (!q && since_refactor_ > 0) {
                // Confirm optimality on fresh numbers before stopping.
                refactor();
                q = choose_entering();
            }
            if (!q) return true;
            if (++iterations_ > limit)
                throw Error(ErrorKind::NumericalFailure, "simplex iteration limit reached");
            if (!step(*q)) return false;
            if (++since_refactor_ >= kRefactorInterval) refactor();
        }
    }

    std::optional<std::size_t> choose_entering() const {
        std::optional<std::size_t> best;
        double best_score = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) {
            if (is_basic_[j] || ub_[j] <= 0.0) continue;
            double score = 0.0;
            if (!at_upper_[j] && d_[j] < -kCostTol) score = -d_[j];
            if (at_upper_[j] && d_[j] > kCostTol) score = d_[j];
            if (score <= 0.0) continue;
            if (bland_) return j;
            if (score > best_score) {
                best_score = score;
                best = j;
            }
        }
        return best;
    }

    // Ratio test. Outside Bland mode this is Harris's two-pass rule: the
    // first pass finds the largest step allowed with bounds relaxed by a small
    // tolerance, the second picks the largest pivot element among the rows
    // that block within that step.
    bool step(std::size_t q) {
        const double dir = at_upper_[q] ? -1.0 : 1.0;
        auto limit = [&](std::size_t i, double a, double slack, bool& to_upper) -> double {
            if (a > kPivotTol) {
                to_upper = false;
                return (std::max(0.0, xb_[i]) + slack) / a;
            }
            if (a < -kPivotTol && std::isfinite(ub_[basis_[i]])) {
                to_upper = true;
                return (std::max(0.0, ub_[basis_[i]] - xb_[i]) + slack) / -a;
            }
            return kInfinity;
        };
        std::optional<std::size_t> leave;
        bool leave_to_upper = false;
        double theta = ub_[q];
        if (bland_) {
            // Smallest basis index among the rows that block first, skipping
            // pivots much smaller than the largest candidate.
            double first = theta;
            for (std::size_t i = 0; i < m_; ++i) {
                bool to_upper = false;
                first = std::min(first, limit(i, at(i, q) * dir, 0.0, to_upper));
            }
            if (first < ub_[q] - 1e-12 || std::isinf(ub_[q])) {
                double biggest = 0.0;
                for (std::size_t i = 0; i < m_; ++i) {
                    bool to_upper = false;
                    if (limit(i, at(i, q) * dir, 0.0, to_upper) <= first + 1e-12)
                        biggest = std::max(biggest, std::abs(at(i, q)));
                }
                for (std::size_t i = 0; i < m_; ++i) {
                    bool to_upper = false;
                    const double lim = limit(i, at(i, q) * dir, 0.0, to_upper);
                    if (lim > first + 1e-12 || std::abs(at(i, q)) < 1e-3 * biggest) continue;
                    if (!leave || basis_[i] < basis_[*leave]) {
                        leave = i;
                        leave_to_upper = to_upper;
                        theta = lim;
                    }
                }
            }
        } else {
            double relaxed = kInfinity;
            for (std::size_t i = 0; i < m_; ++i) {
                bool to_upper = false;
                relaxed = std::min(relaxed, limit(i, at(i, q) * dir, kHarrisTol, to_upper));
            }
            if (ub_[q] <= relaxed) {
                theta = ub_[q];
            } else {
                double best_alpha = 0.0;
                for (std::size_t i = 0; i < m_; ++i) {
                    const double a = at(i, q) * dir;
                    bool to_upper = false;
                    const double lim = limit(i, a, 0.0, to_upper);
                    if (lim <= relaxed && std::abs(a) > best_alpha) {
                        best_alpha = std::abs(a);
                        leave = i;
                        leave_to_upper = to_upper;
                        theta = lim;
                    }
                }
            }
        }
        if (std::isinf(theta)) return false;

        degenerate_ = theta < 1e-12 ? degenerate_ + 1 : 0;
        if (degenerate_ > 50) bland_ = true;
        if (degenerate_ == 0) bland_ = false;

        for (std::size_t i = 0; i < m_; ++i) xb_[i] -= at(i, q) * dir * theta;
        if (!leave) {
            at_upper_[q] = !at_upper_[q];
            return true;
        }
        const std::size_t r = *leave;
        const double entering_value = nonbasic_value(q) + dir * theta;
        const std::size_t out = basis_[r];
        is_basic_[out] = false;
        at_upper_[out] = leave_to_upper;
        if (phase_one_ && out >= first_art_) ub_[out] = 0.0, at_upper_[out] = false;
        pivot(r, q);
        xb_[r] = entering_value;
        return true;
    }

    // Rebuilds the tableau, basic values and reduced costs from the original
    // rows and the current basis, discarding accumulated rounding error.
    void refactor() {
        std::vector<double> B(m_ * m_), inv(m_ * m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t c = 0; c < m_; ++c) B[i * m_ + c] = a0_[i * cols_ + basis_[c]];
            inv[i * m_ + i] = 1.0;
        }
        for (std::size_t c = 0; c < m_; ++c) {
            std::size_t piv = c;
            for (std::size_t i = c + 1; i < m_; ++i)
                if (std::abs(B[i * m_ + c]) > std::abs(B[piv * m_ + c])) piv = i;
            if (std::abs(B[piv * m_ + c]) < 1e-11)
                throw Error(ErrorKind::NumericalFailure, "simplex basis became singular");
            if (piv != c) {
                for (std::size_t k = 0; k < m_; ++k) {
                    std::swap(B[c * m_ + k], B[piv * m_ + k]);
                    std::swap(inv[c * m_ + k], inv[piv * m_ + k]);
                }
            }
            const double p = B[c * m_ + c];
            for (std::size_t k = 0; k < m_; ++k) {
                B[c * m_ + k] /= p;
                inv[c * m_ + k] /= p;
            }
            for (std::size_t i = 0; i < m_; ++i) {
                if (i == c) continue;
                const double f = B[i * m_ + c];
                if (f == 0.0) continue;
                for (std::size_t k = 0; k < m_; ++k) {
                    B[i * m_ + k] -= f * B[c * m_ + k];
                    inv[i * m_ + k] -= f * inv[c * m_ + k];
                }
            }
        }
        std::fill(tab_.begin(), tab_.end(), 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t k = 0; k < m_; ++k) {
                const double f = inv[i * m_ + k];
                if (f == 0.0) continue;
                const double* src = &a0_[k * cols_];
                double* dst = &tab_[i * cols_];
                for (std::size_t j = 0; j < cols_; ++j) dst[j] += f * src[j];
            }
        }
        std::vector<double> rhs = r0_;
        for (std::size_t j = 0; j < cols_; ++j) {
            if (is_basic_[j] || !at_upper_[j]) continue;
            for (std::size_t i = 0; i < m_; ++i) rhs[i] -= a0_[i * cols_ + j] * ub_[j];
        }
        for (std::size_t i = 0; i < m_; ++i) {
            double v = 0.0;
            for (std::size_t k = 0; k < m_; ++k) v += inv[i * m_ + k] * rhs[k];
            xb_[i] = v;
        }
        for (std::size_t i = 0; i < m_; ++i) tab_[i * cols_ + basis_[i]] = 1.0;
        for (std::size_t j = 0; j < cols_; ++j) {
            if (is_basic_[j]) {
                d_[j] = 0.0;
                continue;
            }
            double v = phase_cost(j);
            for (std::size_t i = 0; i < m_; ++i) v -= phase_cost(basis_[i]) * at(i, j);
            d_[j] = v;
        }
        since_refactor_ = 0;
    }

    double phase_cost(std::size_t j) const {
        if (phase_one_) return j >= first_art_ ? 1.0 : 0.0;
        return cost_[j];
    }

    void pivot(std::size_t r, std::size_t q) {
        double* row_r = &tab_[r * cols_];
        const double inv = 1.0 / row_r[q];
        for (std::size_t j = 0; j < cols_; ++j) row_r[j] *= inv;
        row_r[q] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            double* row_i = &tab_[i * cols_];
            const double f = row_i[q];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols_; ++j) row_i[j] -= f * row_r[j];
            row_i[q] = 0.0;
        }
        const double fd = d_[q];
        if (fd != 0.0) {
            for (std::size_t j = 0; j < cols_; ++j) d_[j] -= fd * row_r[j];
            d_[q] = 0.0;
        }
        basis_[r] = q;
        is_basic_[q] = true;
        at_upper_[q] = false;
    }

    void drive_out_artificials() {
        for (std::size_t r = 0; r < m_; ++r) {
            if (basis_[r] < first_art_) continue;
            std::optional<std::size_t> best;
            double best_abs = 1e-7;
            for (std::size_t j = 0; j < first_art_; ++j) {
                if (is_basic_[j]) continue;
                if (std::abs(at(r, j)) > best_abs) {
                    best_abs = std::abs(at(r, j));
                    best = j;
                }
            }
            if (!best) continue;  // redundant row; artificial stays basic at zero
            const std::size_t out = basis_[r];
            const double value = nonbasic_value(*best);
            is_basic_[out] = false;
            at_upper_[out] = false;
            pivot(r, *best);
            xb_[r] = value;
        }
    }

    const LinearProgram& lp_;
    std::size_t n_ = 0, m_ = 0, first_art_ = 0, cols_ = 0;
    std::vector<double> tab_, ub_, cost_, xb_, d_, a0_, r0_;
    std::vector<std::size_t> basis_;
    std::vector<bool> is_basic_, at_upper_;
    bool phase_one_ = true;
    bool bland_ = false;
    int degenerate_ = 0;
    int iterations_ = 0;
    int since_refactor_ = 0;
};

}  // namespace

LpResult lp_solve(const LinearProgram& lp) {
    for (std::size_t j = 0; j < lp.num_variables(); ++j)
        if (lp.upper[j] < lp.lower[j]) return LpResult{LpStatus::Infeasible, {}, 0.0, 0};
    Simplex s(lp);
    return s.solve();
}

}  // namespace linereconf
