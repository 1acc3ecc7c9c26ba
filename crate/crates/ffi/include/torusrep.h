#ifndef TORUSREP_H
#define TORUSREP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum TrpStatus {
  TRP_STATUS_OK = 0,
  TRP_STATUS_NULL_ARGUMENT = 1,
  TRP_STATUS_INVALID_UTF8 = 2,
  TRP_STATUS_INVALID_JSON = 3,
  TRP_STATUS_COMPUTE = 4,
  TRP_STATUS_OUT_OF_RANGE = 5,
  TRP_STATUS_UNAVAILABLE = 6,
  TRP_STATUS_PANIC = 7,
} TrpStatus;

// A sampled pillowcase image curve.
typedef struct TrpImageCurve TrpImageCurve;

// A shearing program, optionally with the error certificate it was built
// with.
typedef struct TrpProgram TrpProgram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *trp_version(void);

// Message of the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *trp_last_error_message(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void trp_string_free(char *s);

// Builds a shearing program for a field job (`FieldConfig` JSON) within
// `eps` using default build parameters.
//
// # Safety
// `field_json` must be a NUL-terminated string and `out` a valid pointer.
enum TrpStatus trp_program_build(const char *field_json, double eps, struct TrpProgram **out);

// Loads a shearing program from its JSON form.
//
// # Safety
// `program_json` must be a NUL-terminated string and `out` a valid pointer.
enum TrpStatus trp_program_from_json(const char *program_json, struct TrpProgram **out);

// Evaluates the program at time `t` on the lifted point (x, y) and writes
// the lifted image to `out[0..2]`.
//
// # Safety
// `program` must be a live handle and `out` must point to two doubles.
enum TrpStatus trp_program_eval(const struct TrpProgram *program,
                                double t,
                                double x,
                                double y,
                                double *out);

// The program as JSON.
//
// # Safety
// `program` must be a live handle and `out` a valid pointer.
enum TrpStatus trp_program_json(const struct TrpProgram *program, char **out);

// The error certificate as JSON; `TRP_STATUS_UNAVAILABLE` for programs
// loaded from JSON.
//
// # Safety
// `program` must be a live handle and `out` a valid pointer.
enum TrpStatus trp_program_certificate_json(const struct TrpProgram *program, char **out);

// Releases a program. NULL is ignored.
//
// # Safety
// `program` must come from this library and not be freed twice.
void trp_program_free(struct TrpProgram *program);

// Samples the pillowcase image of a knot given as `KnotSpec` JSON.
// `samples = 0` keeps the default sample count.
//
// # Safety
// `knot_json` must be a NUL-terminated string and `out` a valid pointer.
enum TrpStatus trp_image_curve_new(const char *knot_json,
                                   uint32_t samples,
                                   uint64_t seed,
                                   struct TrpImageCurve **out);

// Number of irreducible arcs.
//
// # Safety
// `curve` must be a live handle and `out` a valid pointer.
enum TrpStatus trp_image_curve_arc_count(const struct TrpImageCurve *curve, size_t *out);

// Number of vertices of an arc.
//
// # Safety
// `curve` must be a live handle and `out` a valid pointer.
enum TrpStatus trp_image_curve_arc_len(const struct TrpImageCurve *curve, size_t arc, size_t *out);

// Vertex `index` of an arc as (α, β) in `out[0..2]`.
//
// # Safety
// `curve` must be a live handle and `out` must point to two doubles.
enum TrpStatus trp_image_curve_vertex(const struct TrpImageCurve *curve,
                                      size_t arc,
                                      size_t index,
                                      double *out);

// Releases an image curve. NULL is ignored.
//
// # Safety
// `curve` must come from this library and not be freed twice.
void trp_image_curve_free(struct TrpImageCurve *curve);

// Verifies a certificate against a presentation. Sets `*accepted` to 1 or
// 0; when `reason` is non-NULL it receives the rejection reason (NULL on
// acceptance).
//
// # Safety
// String arguments must be NUL-terminated; `accepted` must be valid and
// `reason` NULL or valid.
enum TrpStatus trp_cert_verify(const char *presentation_json,
                               const char *certificate_json,
                               int32_t *accepted,
                               char **reason);

// Finds an irreducible representation of the splice of two knots given as
// `KnotSpec` JSON and returns it as JSON.
//
// # Safety
// String arguments must be NUL-terminated and `out` a valid pointer.
enum TrpStatus trp_splice_rep_json(const char *left_json, const char *right_json, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TORUSREP_H */
