#pragma once

#include <complex>

#include <Eigen/Dense>

namespace echosim {

using Complex = std::complex<double>;

/// 3x3 density matrix of one atom in the Lambda system.
/// Basis order: |1> (ground), |2> (spin/shelving), |3> (excited).
/// Valid states are Hermitian, trace one, with non-negative eigenvalues.
using DensityMatrix = Eigen::Matrix3cd;
using Matrix3c = Eigen::Matrix3cd;

/// All population in |1>.
DensityMatrix ground_state();

/// Pure state |level><level| with level in {1, 2, 3}.
DensityMatrix pure_state(int level);

/// max_ij |rho_ij - conj(rho_ji)|
double hermiticity_error(const DensityMatrix& rho);

/// |Tr rho - 1|
double trace_error(const DensityMatrix& rho);

/// Smallest eigenvalue of the Hermitian part. Physical states stay >= 0
/// up to integration error.
double min_eigenvalue(const DensityMatrix& rho);

/// Throws InputError if rho is not Hermitian/trace-one within `tol`.
void require_valid_state(const DensityMatrix& rho, double tol = 1e-9);

struct BlochVector {
    double u = 0.0;  // 2 Re rho13
    double v = 0.0;  // 2 Im rho13
    double w = 0.0;  // rho33 - rho11
};

/// Bloch-vector components of the optical |1>-|3> subspace.
BlochVector bloch_vector(const DensityMatrix& rho);

}  // namespace echosim
