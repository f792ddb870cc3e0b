#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "nneg/errors.hpp"

namespace nneg::lp {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class SolveStatus { Optimal, Infeasible, Unbounded };

/// min c'x  subject to  A x = b, x >= 0, with b >= 0 componentwise.
template <typename Scalar>
struct StandardForm {
    DenseMatrix<Scalar> A;
    DenseVector<Scalar> b;
    DenseVector<Scalar> c;
};

template <typename Scalar>
struct SimplexResult {
    SolveStatus status = SolveStatus::Infeasible;
    DenseVector<Scalar> x;       ///< optimal point (Optimal only)
    Scalar objective = Scalar(0);
    DenseVector<Scalar> y;       ///< equality multipliers at the optimum: c - A'y >= 0
    DenseVector<Scalar> farkas;  ///< infeasibility certificate: f'A <= 0, f'b > 0
    DenseVector<Scalar> ray;     ///< improving direction in x-space (Unbounded only)
    int iterations = 0;
};

/// Dense two-phase tableau simplex with Bland's rule throughout. Bland makes
/// the pivot sequence deterministic and cycling impossible; fine at the sizes
/// solved here (tens of rows).
template <typename Scalar>
class SimplexSolver {
public:
    explicit SimplexSolver(Scalar pivot_tol = Scalar(1e-11), Scalar feas_tol = Scalar(1e-9))
        : pivot_tol_(pivot_tol), feas_tol_(feas_tol) {}

    SimplexResult<Scalar> solve(const StandardForm<Scalar>& lp) const {
        const Eigen::Index m = lp.A.rows();
        const Eigen::Index nvar = lp.A.cols();
        if (lp.b.size() != m || lp.c.size() != nvar)
            throw ValidationError("simplex: dimension mismatch");
        for (Eigen::Index i = 0; i < m; ++i)
            if (lp.b[i] < Scalar(0)) throw ValidationError("simplex: rhs must be nonnegative");

        const Eigen::Index ncol = nvar + m;  // originals then artificials
        DenseMatrix<Scalar> T(m + 1, ncol + 1);
        T.setZero();
        T.block(0, 0, m, nvar) = lp.A;
        T.block(0, nvar, m, m).setIdentity();
        T.col(ncol).head(m) = lp.b;

        std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
        for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = nvar + i;

        // Phase 1 objective: sum of artificials. Reduced-cost row with the
        // artificial basis: r_j = -sum_i A(i,j) on originals, 0 on artificials.
        for (Eigen::Index j = 0; j < ncol + 1; ++j) T(m, j) = -T.block(0, j, m, 1).sum();
        T.block(m, nvar, 1, m).setZero();

        SimplexResult<Scalar> out;
        int iters = 0;
        const int iter_cap = 2000 + 200 * static_cast<int>(m + ncol);

        if (!run_phase(T, basis, nvar, /*phase1=*/true, iters, iter_cap, out)) return out;

        const Scalar feas_scale = Scalar(1) + lp.b.template lpNorm<Eigen::Infinity>();
        const Scalar phase1_obj = -T(m, ncol);
        if (phase1_obj > feas_tol_ * feas_scale) {
            out.status = SolveStatus::Infeasible;
            out.farkas.resize(m);
            for (Eigen::Index i = 0; i < m; ++i) out.farkas[i] = Scalar(1) - T(m, nvar + i);
            out.iterations = iters;
            return out;
        }

        // Drive basic artificials out where a nonzero original pivot exists;
        // rows that stay artificial-basic are redundant constraints.
        for (Eigen::Index i = 0; i < m; ++i) {
            if (basis[static_cast<std::size_t>(i)] < nvar) continue;
            for (Eigen::Index j = 0; j < nvar; ++j) {
                if (std::abs(T(i, j)) > pivot_tol_) {
                    pivot(T, basis, i, j);
                    ++iters;
                    break;
                }
            }
        }

        // Phase 2: rebuild the reduced-cost row from the real objective.
        T.row(m).setZero();
        T.block(m, 0, 1, nvar) = lp.c.transpose();
        for (Eigen::Index i = 0; i < m; ++i) {
            const Eigen::Index bj = basis[static_cast<std::size_t>(i)];
            if (bj < nvar && lp.c[bj] != Scalar(0)) T.row(m) -= lp.c[bj] * T.row(i);
        }

        if (!run_phase(T, basis, nvar, /*phase1=*/false, iters, iter_cap, out)) {
            if (out.status == SolveStatus::Unbounded) out.iterations = iters;
            return out;
        }

        out.status = SolveStatus::Optimal;
        out.x = DenseVector<Scalar>::Zero(nvar);
        for (Eigen::Index i = 0; i < m; ++i) {
            const Eigen::Index bj = basis[static_cast<std::size_t>(i)];
            if (bj < nvar) out.x[bj] = T(i, ncol);
        }
        out.objective = -T(m, ncol);
        out.y.resize(m);
        for (Eigen::Index i = 0; i < m; ++i) out.y[i] = -T(m, nvar + i);
        out.iterations = iters;
        return out;
    }

private:
    Scalar pivot_tol_;
    Scalar feas_tol_;

    static void pivot(DenseMatrix<Scalar>& T, std::vector<Eigen::Index>& basis, Eigen::Index pr,
                      Eigen::Index pc) {
        T.row(pr) /= T(pr, pc);
        for (Eigen::Index i = 0; i < T.rows(); ++i) {
            if (i == pr) continue;
            const Scalar f = T(i, pc);
            if (f != Scalar(0)) T.row(i) -= f * T.row(pr);
        }
        basis[static_cast<std::size_t>(pr)] = pc;
    }

    /// Bland: entering = lowest-index eligible column with negative reduced
    /// cost; leaving = lowest basis index among minimal ratios.
    /// Returns false when the phase ended Unbounded (phase 2 only).
    bool run_phase(DenseMatrix<Scalar>& T, std::vector<Eigen::Index>& basis, Eigen::Index nvar,
                   bool phase1, int& iters, int iter_cap, SimplexResult<Scalar>& out) const {
        const Eigen::Index m = T.rows() - 1;
        const Eigen::Index ncol = T.cols() - 1;
        while (true) {
            Eigen::Index enter = -1;
            const Eigen::Index limit = phase1 ? ncol : nvar;  // artificials never re-enter
            for (Eigen::Index j = 0; j < limit; ++j) {
                if (T(m, j) < -pivot_tol_) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return true;

            Eigen::Index leave = -1;
            Scalar best = Scalar(0);
            for (Eigen::Index i = 0; i < m; ++i) {
                if (T(i, enter) > pivot_tol_) {
                    const Scalar ratio = T(i, ncol) / T(i, enter);
                    if (leave < 0 || ratio < best - pivot_tol_ ||
                        (ratio < best + pivot_tol_ &&
                         basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                        leave = i;
                        best = ratio;
                    }
                }
            }
            if (leave < 0) {
                out.status = SolveStatus::Unbounded;
                out.ray = DenseVector<Scalar>::Zero(nvar);
                if (enter < nvar) out.ray[enter] = Scalar(1);
                for (Eigen::Index i = 0; i < m; ++i) {
                    const Eigen::Index bj = basis[static_cast<std::size_t>(i)];
                    if (bj < nvar) out.ray[bj] = -T(i, enter);
                }
                return false;
            }
            pivot(T, basis, leave, enter);
            if (++iters > iter_cap)
                throw InternalInconsistency("simplex: iteration cap exceeded");
        }
    }
};

/// Convenience wrapper for the common double case.
inline SimplexResult<double> simplex_solve(const StandardForm<double>& lp) {
    return SimplexSolver<double>().solve(lp);
}

}  // namespace nneg::lp
