#pragma once

// Test-only dense symmetric eigensolver (cyclic Jacobi rotations), the
// independent oracle for the power-iteration kernel PCA. Deliberately shares
// no code with the implementation under test.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace testutil {

struct EigenSystem {
    std::vector<double> values;               // descending
    std::vector<std::vector<double>> vectors; // unit column per value
};

inline EigenSystem jacobiEigenSymmetric(std::vector<std::vector<double>> a,
                                        size_t sweeps = 100,
                                        double tol = 1e-14) {
    const size_t n = a.size();
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) v[i][i] = 1.0;

    for (size_t sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        }
        if (off < tol) break;
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                if (std::fabs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) +
                                  std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    EigenSystem sys;
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            if (a[order[j]][order[j]] > a[order[i]][order[i]]) {
                std::swap(order[i], order[j]);
            }
        }
    }
    for (size_t i = 0; i < n; ++i) {
        sys.values.push_back(a[order[i]][order[i]]);
        std::vector<double> column(n);
        for (size_t k = 0; k < n; ++k) column[k] = v[k][order[i]];
        sys.vectors.push_back(column);
    }
    return sys;
}

// Double-centered cosine kernel of the rows of a (n x d) matrix, materialized
// explicitly for the oracle path.
inline std::vector<std::vector<double>> centeredCosineKernel(
    const std::vector<std::vector<double>>& rows) {
    const size_t n = rows.size();
    std::vector<std::vector<double>> k(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            double dot = 0.0, ni = 0.0, nj = 0.0;
            for (size_t c = 0; c < rows[i].size(); ++c) {
                dot += rows[i][c] * rows[j][c];
                ni += rows[i][c] * rows[i][c];
                nj += rows[j][c] * rows[j][c];
            }
            if (ni == 0.0 || nj == 0.0) {
                throw std::invalid_argument("oracle: zero row");
            }
            k[i][j] = dot / std::sqrt(ni * nj);
        }
    }
    std::vector<double> rowMean(n, 0.0), colMean(n, 0.0);
    double allMean = 0.0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            rowMean[i] += k[i][j] / n;
            colMean[j] += k[i][j] / n;
            allMean += k[i][j] / (double(n) * n);
        }
    }
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            k[i][j] = k[i][j] - rowMean[i] - colMean[j] + allMean;
        }
    }
    return k;
}

}  // namespace testutil
