#ifndef TOVDS_H
#define TOVDS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TovdsColumn {
  TOVDS_COLUMN_R = 0,
  TOVDS_COLUMN_M = 1,
  TOVDS_COLUMN_S = 2,
  TOVDS_COLUMN_RHO = 3,
  TOVDS_COLUMN_P = 4,
  TOVDS_COLUMN_U = 5,
  TOVDS_COLUMN_F = 6,
  TOVDS_COLUMN_H = 7,
} TovdsColumn;

typedef enum TovdsStatus {
  TOVDS_STATUS_OK = 0,
  TOVDS_STATUS_NULL_POINTER = 1,
  TOVDS_STATUS_BUFFER_TOO_SMALL = 2,
  TOVDS_STATUS_PANIC = 3,
  TOVDS_STATUS_GAMMA_NOT_ADMISSIBLE = 10,
  TOVDS_STATUS_CAUSALITY_VIOLATED = 11,
  TOVDS_STATUS_DOMAIN_EXCEEDED = 12,
  TOVDS_STATUS_NO_CONVERGENCE = 13,
  TOVDS_STATUS_INVALID_INPUT = 14,
  TOVDS_STATUS_NOT_MONOTONE_SHORT = 15,
  TOVDS_STATUS_HORIZON_APPROACHED = 16,
  TOVDS_STATUS_NO_BOUNDARY = 17,
  TOVDS_STATUS_INSUFFICIENT_RESOLUTION = 18,
  TOVDS_STATUS_QUADRATURE_FAILED = 19,
  TOVDS_STATUS_GRID_MISMATCH = 20,
  TOVDS_STATUS_NOT_CONVERGED = 21,
  TOVDS_STATUS_SPURIOUS_MODE = 22,
  TOVDS_STATUS_NONPOSITIVE_EIGENVALUE = 23,
  TOVDS_STATUS_UNSTABLE_STEP = 24,
  TOVDS_STATUS_DATA_NOT_SMALL = 25,
  TOVDS_STATUS_DEGENERATE_FACTOR = 26,
  TOVDS_STATUS_SINGULAR_MATCHING = 27,
  TOVDS_STATUS_CONFIG_INVALID = 28,
  TOVDS_STATUS_IO = 29,
} TovdsStatus;

// A validated equation of state together with `G`, `c` and `Lambda`.
typedef struct TovdsEos TovdsEos;

typedef struct TovdsModes TovdsModes;

typedef struct TovdsProfile TovdsProfile;

// Boundary values of an equilibrium.
typedef struct TovdsBoundary {
  double r_plus;
  double m_plus;
  double kappa_plus;
  double q_plus;
  double c_rho;
} TovdsBoundary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null when the last
// call succeeded. The pointer stays valid until the next call on the same
// thread.
const char *tovds_last_error_message(void);

// Stable name of a status code, as a static string.
const char *tovds_status_name(enum TovdsStatus status);

// Builds an equation of state. `omega` may be null when `omega_len` is 0;
// a non-positive `omega_radius` means no radius limit.
//
// # Safety
// `omega` must point to `omega_len` readable doubles, and `out` must be a
// valid place to store a handle.
enum TovdsStatus tovds_eos_new(double a,
                               double gamma,
                               const double *omega,
                               size_t omega_len,
                               double omega_radius,
                               double g,
                               double c,
                               double lambda,
                               struct TovdsEos **out);

// # Safety
// `eos` must be null or a handle from [`tovds_eos_new`] not yet freed.
void tovds_eos_free(struct TovdsEos *eos);

// Pressure at rest-mass density `rho`.
//
// # Safety
// `eos` must be a live handle and `out` writable.
enum TovdsStatus tovds_eos_pressure(const struct TovdsEos *eos, double rho, double *out);

// Enthalpy potential `u` at density `rho`.
//
// # Safety
// `eos` must be a live handle and `out` writable.
enum TovdsStatus tovds_eos_enthalpy(const struct TovdsEos *eos, double rho, double *out);

// Inverse of [`tovds_eos_enthalpy`].
//
// # Safety
// `eos` must be a live handle and `out` writable.
enum TovdsStatus tovds_eos_rho_of_u(const struct TovdsEos *eos, double u, double *out);

// Adiabatic index as a function of `u`.
//
// # Safety
// `eos` must be a live handle and `out` writable.
enum TovdsStatus tovds_eos_gamma1(const struct TovdsEos *eos, double u, double *out);

// Integrates the equilibrium with central density `rho_c` to relative
// tolerance `tol`.
//
// # Safety
// `eos` must be a live handle and `out` a valid place to store a handle.
enum TovdsStatus tovds_profile_integrate(const struct TovdsEos *eos,
                                         double rho_c,
                                         double tol,
                                         struct TovdsProfile **out);

// # Safety
// `profile` must be null or a live handle.
void tovds_profile_free(struct TovdsProfile *profile);

// # Safety
// `profile` must be a live handle and `out` writable.
enum TovdsStatus tovds_profile_boundary(const struct TovdsProfile *profile,
                                        struct TovdsBoundary *out);

// Number of grid points; 0 for a null handle.
//
// # Safety
// `profile` must be null or a live handle.
size_t tovds_profile_len(const struct TovdsProfile *profile);

// Copies one profile column into `out`. `len_out` receives the column
// length even when the buffer is too small.
//
// # Safety
// `profile` must be a live handle, `out` must hold `cap` doubles and
// `len_out` must be null or writable.
enum TovdsStatus tovds_profile_copy_column(const struct TovdsProfile *profile,
                                           enum TovdsColumn column,
                                           double *out,
                                           size_t cap,
                                           size_t *len_out);

// Lowest `k` radial modes on a `grid`-interval mesh. The coefficient chart
// is sampled at `chart_grid` angles.
//
// # Safety
// `profile` must be a live handle and `out` a valid place to store a handle.
enum TovdsStatus tovds_modes_solve(const struct TovdsProfile *profile,
                                   size_t k,
                                   size_t grid,
                                   size_t chart_grid,
                                   struct TovdsModes **out);

// # Safety
// `modes` must be null or a live handle.
void tovds_modes_free(struct TovdsModes *modes);

// # Safety
// `modes` must be null or a live handle.
size_t tovds_modes_count(const struct TovdsModes *modes);

// Number of points in each eigenfunction; 0 for a null handle.
//
// # Safety
// `modes` must be null or a live handle.
size_t tovds_modes_grid_len(const struct TovdsModes *modes);

// Eigenvalues in physical units, ascending.
//
// # Safety
// `modes` must be a live handle, `out` must hold `cap` doubles and
// `len_out` must be null or writable.
enum TovdsStatus tovds_modes_lambdas(const struct TovdsModes *modes,
                                     double *out,
                                     size_t cap,
                                     size_t *len_out);

// Grid `x` shared by all eigenfunctions.
//
// # Safety
// As for [`tovds_modes_lambdas`].
enum TovdsStatus tovds_modes_grid(const struct TovdsModes *modes,
                                  double *out,
                                  size_t cap,
                                  size_t *len_out);

// Eigenfunction `index` (0-based).
//
// # Safety
// As for [`tovds_modes_lambdas`].
enum TovdsStatus tovds_modes_eigenfunction(const struct TovdsModes *modes,
                                           size_t index,
                                           double *out,
                                           size_t cap,
                                           size_t *len_out);

// Exterior metric factor `1 - 2Gm+/(c^2 r) - Lambda r^2/3`.
//
// # Safety
// `eos` must be a live handle and `out` writable.
enum TovdsStatus tovds_sds_kappa(const struct TovdsEos *eos, double r, double m_plus, double *out);

// Positive horizon radii in ascending order; `len_out` receives how many
// there are (0, 1 or 2).
//
// # Safety
// `eos` must be a live handle, `out` must hold `cap` doubles and `len_out`
// must be null or writable.
enum TovdsStatus tovds_horizons(const struct TovdsEos *eos,
                                double m_plus,
                                double *out,
                                size_t cap,
                                size_t *len_out);

// Jump coefficient of the matched exterior for boundary velocity `v` and
// its time derivative.
//
// # Safety
// `eos` must be a live handle and `out` writable.
enum TovdsStatus tovds_jump_coefficient(const struct TovdsEos *eos,
                                        double v,
                                        double dv_dt,
                                        double r,
                                        double m_plus,
                                        double kappa_plus,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOVDS_H */
