#include "mediatop/mediatop.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <limits>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "mediatop/error.hpp"
#include "mediatop/harness.hpp"
#include "mediatop/io.hpp"

using namespace mediatop;

struct mt_dataset {
    ExperimentData data;
};

struct mt_model {
    TrainedModel model;
    std::optional<Assignments> assignments;
    std::optional<std::string> report;
};

namespace {

thread_local std::string t_last_error;

mt_status status_of(ErrorKind k) {
    switch (k) {
        case ErrorKind::data:
        case ErrorKind::io:
        case ErrorKind::input:
        case ErrorKind::shape: return MT_ERR_DATA;
        case ErrorKind::config:
        case ErrorKind::domain:
        case ErrorKind::range: return MT_ERR_CONFIG;
        case ErrorKind::invariant: return MT_ERR_INVARIANT;
    }
    return MT_ERR_INVARIANT;
}

template <class Fn>
mt_status guarded(Fn&& fn) {
    try {
        t_last_error.clear();
        fn();
        return MT_OK;
    } catch (const Error& e) {
        t_last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        t_last_error = "out of memory";
        return MT_ERR_DATA;
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return MT_ERR_INVARIANT;
    } catch (...) {
        t_last_error = "unknown failure";
        return MT_ERR_INVARIANT;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(const void* p, const char* what) {
    if (!p) fail(ErrorKind::input, std::string(what) + " must not be null");
}

ExperimentConfig parse_config(const char* config_json) {
    require(config_json, "config");
    ExperimentConfig c = config_from_json(config_json);
    c.validate();
    return c;
}

// Source for assigning points to an existing model: the loaded matrix, or
// the metric evaluated on demand.
std::shared_ptr<const DissimilaritySource> lazy_source(const ExperimentData& data, const ExperimentConfig& c) {
    if (data.source) return data.source;
    if (data.vectors) {
        return std::make_shared<MetricDissimilarity>(std::make_shared<VectorDataset>(*data.vectors), c.metric);
    }
    return std::make_shared<MetricDissimilarity>(std::make_shared<SequenceDataset>(*data.sequences), c.indel);
}

}  // namespace

extern "C" {

const char* mt_version(void) { return "1.0.0"; }

const char* mt_last_error(void) { return t_last_error.c_str(); }

void mt_string_free(char* s) { std::free(s); }

mt_status mt_dataset_load_vectors(const char* path, int label_column, mt_dataset** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        auto ds = std::make_unique<mt_dataset>();
        ds->data.vectors = read_vectors(path, label_column != 0);
        ds->data.labels = ds->data.vectors->labels;
        *out = ds.release();
    });
}

mt_status mt_dataset_load_sequences(const char* path, const char* labels_path, mt_dataset** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        auto ds = std::make_unique<mt_dataset>();
        ds->data.sequences = read_sequences(path);
        if (labels_path) ds->data.labels = read_label_file(labels_path, ds->data.sequences->size());
        *out = ds.release();
    });
}

mt_status mt_dataset_load_matrix(const char* path, const char* labels_path, int symmetric, mt_dataset** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        auto ds = std::make_unique<mt_dataset>();
        if (is_binary_dissimilarity(path)) {
            ds->data.source = std::make_shared<BinaryFileDissimilarity>(path, symmetric != 0);
        } else {
            ds->data.source = std::make_shared<DenseDissimilarity>(read_dissimilarity(path, symmetric != 0));
        }
        validate_dissimilarity(*ds->data.source);
        if (labels_path) ds->data.labels = read_label_file(labels_path, ds->data.source->size());
        *out = ds.release();
    });
}

mt_status mt_dataset_size(const mt_dataset* data, size_t* out) {
    return guarded([&] {
        require(data, "dataset");
        require(out, "out");
        *out = data->data.size();
    });
}

void mt_dataset_free(mt_dataset* data) { delete data; }

mt_status mt_distance_write(const mt_dataset* data, const char* config_json, const char* path, int binary) {
    return guarded([&] {
        require(data, "dataset");
        require(path, "path");
        ExperimentConfig c = parse_config(config_json);
        const ExperimentData prepared = prepare_data(data->data, c);
        const auto d = dissimilarity_for(prepared, c);
        if (binary) {
            write_dissimilarity_binary(*d, path);
        } else {
            write_dissimilarity_text(*d, path);
        }
    });
}

mt_status mt_train(const mt_dataset* data, const char* config_json, mt_model** out) {
    return guarded([&] {
        require(data, "dataset");
        require(out, "out");
        const ExperimentConfig c = parse_config(config_json);
        const ExperimentData prepared = prepare_data(data->data, c);
        std::shared_ptr<const DissimilaritySource> d;
        if (is_median(c.algorithm)) d = dissimilarity_for(prepared, c);

        auto m = std::make_unique<mt_model>();
        const auto start = std::chrono::steady_clock::now();
        m->model = fit(prepared, d.get(), {}, c, c.seed);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        m->assignments = assign(m->model, prepared, d.get(), {});

        EvaluationReport report;
        report.config = c;
        RunRecord rec;
        rec.seed = c.seed;
        rec.train_size = prepared.size();
        rec.e_half = m->model.final_cost;
        rec.e_norm = m->model.final_cost / static_cast<double>(prepared.size());
        rec.epochs_run = m->model.epochs_run;
        rec.converged = m->model.converged;
        rec.seconds_per_epoch = seconds / static_cast<double>(std::max<std::size_t>(m->model.epochs_run, 1));
        for (const auto& h : m->model.history) rec.counters += h.counters;
        rec.accuracy = rec.train_accuracy =
            prepared.labels ? accuracy(m->model, *m->assignments, *prepared.labels)
                            : std::numeric_limits<double>::quiet_NaN();
        report.runs.push_back(rec);
        aggregate(report);
        m->report = report_json(report);
        *out = m.release();
    });
}

mt_status mt_model_json(const mt_model* model, char** out) {
    return guarded([&] {
        require(model, "model");
        require(out, "out");
        *out = dup_string(model_to_json(model->model));
    });
}

mt_status mt_model_assignments_csv(const mt_model* model, const mt_dataset* data, char** out) {
    return guarded([&] {
        require(model, "model");
        require(out, "out");
        if (!data) {
            if (!model->assignments) fail(ErrorKind::input, "a dataset is needed to assign points");
            *out = dup_string(assignments_csv(*model->assignments));
            return;
        }
        const ExperimentConfig& c = model->model.config;
        const ExperimentData prepared = prepare_data(data->data, c);
        std::shared_ptr<const DissimilaritySource> d;
        if (is_median(model->model.algorithm)) d = lazy_source(prepared, c);
        *out = dup_string(assignments_csv(assign(model->model, prepared, d.get(), {})));
    });
}

mt_status mt_model_report_json(const mt_model* model, char** out) {
    return guarded([&] {
        require(model, "model");
        require(out, "out");
        if (!model->report) fail(ErrorKind::input, "model was not trained in this session");
        *out = dup_string(*model->report);
    });
}

mt_status mt_model_from_json(const char* json, mt_model** out) {
    return guarded([&] {
        require(json, "json");
        require(out, "out");
        auto m = std::make_unique<mt_model>();
        m->model = model_from_json(json);
        *out = m.release();
    });
}

void mt_model_free(mt_model* model) { delete model; }

mt_status mt_evaluate(const mt_dataset* data, const char* config_json, char** report_json_out) {
    return guarded([&] {
        require(data, "dataset");
        require(report_json_out, "out");
        const ExperimentConfig c = parse_config(config_json);
        const ExperimentData prepared = prepare_data(data->data, c);
        *report_json_out = dup_string(report_json(cross_validate(prepared, c)));
    });
}

mt_status mt_benchmark(const mt_dataset* data, const char* config_json, const char* implementations,
                       char** report_json_out, char** table_csv) {
    return guarded([&] {
        require(data, "dataset");
        require(implementations, "implementations");
        const ExperimentConfig c = parse_config(config_json);
        const ExperimentData prepared = prepare_data(data->data, c);
        std::vector<std::string> impls;
        std::stringstream ss(implementations);
        for (std::string item; std::getline(ss, item, ',');) {
            if (!item.empty()) impls.push_back(item);
        }
        const BenchmarkReport r = benchmark(prepared, c, impls);
        if (report_json_out) *report_json_out = dup_string(benchmark_json(r));
        if (table_csv) *table_csv = dup_string(benchmark_csv(r));
        require_identical(r);
    });
}

}  // extern "C"
