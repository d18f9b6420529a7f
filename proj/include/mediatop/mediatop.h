#ifndef MEDIATOP_H
#define MEDIATOP_H

/* C interface to the mediatop library. Handles are opaque; every call
 * returns a status code and, on failure, leaves a message readable through
 * mt_last_error() on the calling thread. Strings handed out by the library
 * are released with mt_string_free(). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MT_API __declspec(dllexport)
#else
#define MT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mt_status {
    MT_OK = 0,
    MT_ERR_USAGE = 1,
    MT_ERR_DATA = 2,
    MT_ERR_CONFIG = 3,
    MT_ERR_INVARIANT = 4
} mt_status;

typedef struct mt_dataset mt_dataset;
typedef struct mt_model mt_model;

MT_API const char* mt_version(void);
MT_API const char* mt_last_error(void);
MT_API void mt_string_free(char* s);

/* Input. label_column: last field of each row is a class name. labels_path
 * may be NULL. */
MT_API mt_status mt_dataset_load_vectors(const char* path, int label_column, mt_dataset** out);
MT_API mt_status mt_dataset_load_sequences(const char* path, const char* labels_path, mt_dataset** out);
/* Binary matrices are read on demand from disk; text matrices are loaded. */
MT_API mt_status mt_dataset_load_matrix(const char* path, const char* labels_path, int symmetric,
                                        mt_dataset** out);
MT_API mt_status mt_dataset_size(const mt_dataset* data, size_t* out);
MT_API void mt_dataset_free(mt_dataset* data);

/* Writes the all-pairs dissimilarity of the dataset under the configuration's
 * metric (and standardization). binary != 0 selects the DSM1 format. */
MT_API mt_status mt_distance_write(const mt_dataset* data, const char* config_json, const char* path,
                                   int binary);

/* Training on all points with the configuration given as JSON. */
MT_API mt_status mt_train(const mt_dataset* data, const char* config_json, mt_model** out);
MT_API mt_status mt_model_json(const mt_model* model, char** out);
/* Assignment of every point of `data` (point_index, winner, rank0_distance). */
MT_API mt_status mt_model_assignments_csv(const mt_model* model, const mt_dataset* data, char** out);
/* Training report of the last mt_train call on this model. */
MT_API mt_status mt_model_report_json(const mt_model* model, char** out);
MT_API mt_status mt_model_from_json(const char* json, mt_model** out);
MT_API void mt_model_free(mt_model* model);

/* Repeated held-out evaluation; returns the report JSON. */
MT_API mt_status mt_evaluate(const mt_dataset* data, const char* config_json, char** report_json);

/* Per-epoch timing of several implementations (comma separated). A result
 * mismatch between exact implementations returns MT_ERR_INVARIANT; the
 * outputs are filled either way. */
MT_API mt_status mt_benchmark(const mt_dataset* data, const char* config_json, const char* implementations,
                              char** report_json, char** table_csv);

#ifdef __cplusplus
}
#endif

#endif /* MEDIATOP_H */
