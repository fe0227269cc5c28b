/*
 * ultrafun C API: spectral-level numerics behind opaque handles.
 *
 * Every function returns a uf_status; on failure uf_last_error() holds a
 * thread-local message describing what went wrong. Handles are created and
 * destroyed by the matching *_create / *_free pair; freeing NULL is a no-op.
 */
#ifndef ULTRAFUN_H
#define ULTRAFUN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum uf_status {
  UF_OK = 0,
  UF_ERR_INVALID_ARG = 1,
  UF_ERR_CONFIG = 2,
  UF_ERR_DOMAIN = 3,
  UF_ERR_NUMERIC = 4,
  UF_ERR_NONCONVERGED = 5,
  UF_ERR_IO = 6,
  UF_ERR_INTERNAL = 7
} uf_status;

const char* uf_version(void);

/* Thread-local message of the most recent failure in this thread. */
const char* uf_last_error(void);

/* ---- level schedules and scalar nets ---------------------------------- */

typedef struct uf_schedule uf_schedule;

uf_status uf_schedule_geometric(int base, double growth, int levels, uf_schedule** out);
uf_status uf_schedule_from_dims(const int* dims, int count, uf_schedule** out);
int uf_schedule_levels(const uf_schedule* schedule);
int uf_schedule_dim(const uf_schedule* schedule, int level);
void uf_schedule_free(uf_schedule* schedule);

typedef struct uf_net uf_net;

/* The callback must be deterministic in (level, dim). */
typedef double (*uf_net_eval_fn)(int level, int dim, void* user);

uf_status uf_net_create(const uf_schedule* schedule, uf_net_eval_fn eval, void* user,
                        uf_net** out);
uf_status uf_net_constant(const uf_schedule* schedule, double value, uf_net** out);
uf_status uf_net_add(const uf_net* a, const uf_net* b, uf_net** out);
uf_status uf_net_mul(const uf_net* a, const uf_net* b, uf_net** out);
uf_status uf_net_value(const uf_net* net, int level, double* out);
void uf_net_free(uf_net* net);

/* tag: 0 infinitesimal, 1 finite, 2 infinite, 3 undetermined.
 * shadow is valid when has_shadow != 0; infinite tags report +/-HUGE_VAL. */
typedef struct uf_num_class {
  int tag;
  int has_shadow;
  double shadow;
} uf_num_class;

uf_status uf_net_classify(const uf_net* net, double tol, uf_num_class* out);
uf_status uf_net_infinitely_close(const uf_net* a, const uf_net* b, double tol, int* out);

/* ---- bases, quadrature, ultrafunctions -------------------------------- */

typedef struct uf_basis uf_basis;

/* kind: "sine_box", "fourier_ring" or "hermite_line"; theta_axis carries
 * space_dim entries (per-axis mode counts; ring/line take one). */
uf_status uf_basis_create(const char* kind, int space_dim, const int* theta_axis,
                          uf_basis** out);
int uf_basis_theta(const uf_basis* basis);
/* Complex value of e_j at x (re/im may be NULL to skip). */
uf_status uf_basis_eval(const uf_basis* basis, int j, const double* x, double* re, double* im);
void uf_basis_free(uf_basis* basis);

typedef struct uf_quadrature uf_quadrature;

uf_status uf_quadrature_create(const uf_basis* basis, double oversample, uf_quadrature** out);
int uf_quadrature_size(const uf_quadrature* quad);
double uf_quadrature_weight_sum(const uf_quadrature* quad);
/* max entry of |gram - identity|, the orthonormality defect. */
uf_status uf_quadrature_gram_defect(const uf_basis* basis, const uf_quadrature* quad,
                                    double* out);
void uf_quadrature_free(uf_quadrature* quad);

typedef struct uf_fun uf_fun;

typedef double (*uf_field_fn)(const double* x, void* user);

uf_status uf_fun_from_coeffs(const uf_basis* basis, const double* coeffs, int count,
                             uf_fun** out);
uf_status uf_fun_project(const uf_basis* basis, const uf_quadrature* quad, uf_field_fn f,
                         void* user, uf_fun** out);
uf_status uf_fun_delta(const uf_basis* basis, const double* q, uf_fun** out);
int uf_fun_theta(const uf_fun* fun);
uf_status uf_fun_coeffs(const uf_fun* fun, double* out, int capacity);
uf_status uf_fun_eval(const uf_fun* fun, const double* x, double* out);
uf_status uf_fun_inner(const uf_fun* a, const uf_fun* b, double* out);
/* Serializes to the JSON record {basis_kind, space_dim, theta, theta_axis,
 * coeffs}. Returns the full length through `needed` (excluding the NUL);
 * copies when capacity allows. */
uf_status uf_fun_to_json(const uf_fun* fun, char* buffer, int capacity, int* needed);
void uf_fun_free(uf_fun* fun);

/* ---- Dirichlet solves -------------------------------------------------- */

uf_status uf_dirichlet_solve_smooth(const uf_basis* basis, const uf_quadrature* quad,
                                    uf_field_fn f, void* user, uf_fun** out);
uf_status uf_dirichlet_solve_dirac(const uf_basis* basis, const uf_quadrature* quad,
                                   const double* y, uf_fun** out);

/* ---- quantum-mechanics helpers ----------------------------------------- */

/* Eigenvalues of the free box Hamiltonian on theta sine modes. */
uf_status uf_qm_box_eigenvalues(int theta, double mass, double oversample, double* out,
                                int capacity);
/* max_a |<[P,Q] e_a, e_a>| over the eigenvectors of the position matrix. */
uf_status uf_qm_commutator_max_defect(const char* basis_kind, int theta, double oversample,
                                      double* out);

/* ---- experiment runner -------------------------------------------------- */

/* Runs one experiment described by a flat JSON config (see the CLI for the
 * schema); writes the declared data files plus a manifest. Returns
 * UF_ERR_NONCONVERGED when results were written but an optimizer failed to
 * converge, UF_ERR_CONFIG for invalid configs. */
uf_status uf_run_experiment(const char* config_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ULTRAFUN_H */
