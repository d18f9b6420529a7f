// mediatop: command-line front end over the C interface.
//
//   mediatop train      --input iris.csv --algorithm median-ng --k 6 --standardize
//   mediatop evaluate   --input wdbc.csv --split halves --repeats 100 --k 40 ...
//   mediatop benchmark  --input data.csv --algorithm median-som --impls naive,block,bnb-full
//   mediatop distance   --input chroms.txt --metric edit --output chroms.dsm
//   mediatop inspect    --model model.json [--input iris.csv]
//
// Exit codes: 0 ok, 1 usage, 2 data, 3 configuration, 4 invariant violation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mediatop/mediatop.h"

namespace {

struct InputOptions {
    std::string path;
    std::string format = "auto";  // auto | vectors | sequences | matrix
    std::string labels;
    bool no_label_column = false;
    bool asymmetric = false;
};

struct ConfigOptions {
    std::string algorithm = "median-ng";
    std::string impl;
    std::size_t k = 2;
    std::size_t epochs = 100;
    std::optional<double> sigma_start;
    double sigma_end = 0.01;
    bool supervised = false;
    double beta = 1.0;
    bool plain_ranks = false;
    std::size_t patches = 1;
    std::string multiplicity = "point";
    std::uint64_t seed = 0;
    std::string metric = "sqeuclidean";
    double indel = 4.5;
    bool standardize = false;
    bool sample_sd = false;
    std::string lattice;  // RxC
    bool hexagonal = false;
    std::string ties = "lowest-index";
    std::string split = "none";
    std::size_t folds = 10;
    std::size_t repeats = 1;
    std::optional<bool> stratified;
    double train_fraction = 0.5;
};

void add_input(CLI::App* app, InputOptions& in) {
    app->add_option("-i,--input", in.path, "Vectors (CSV/whitespace), sequences or dissimilarity matrix")->required();
    app->add_option("--format", in.format, "auto, vectors, sequences or matrix")
        ->check(CLI::IsMember({"auto", "vectors", "sequences", "matrix"}));
    app->add_option("--labels", in.labels, "Class name per line for sequence or matrix input");
    app->add_flag("--no-label-column", in.no_label_column, "Vector rows carry no trailing class name");
    app->add_flag("--asymmetric", in.asymmetric, "Matrix input is not symmetric");
}

void add_config(CLI::App* app, ConfigOptions& c) {
    app->add_option("-a,--algorithm", c.algorithm,
                    "median-ng, median-som, kmedoids, patch-ng, batch-ng, batch-som, batch-kmeans");
    app->add_option("--impl", c.impl, "Search engine (naive, block, bnb-self, bnb-full, bnb-full-early, ng-early-*)");
    app->add_option("-k,--k", c.k, "Number of prototypes");
    app->add_option("-e,--epochs", c.epochs, "Epoch budget");
    app->add_option("--sigma-start", c.sigma_start, "Initial neighborhood range");
    app->add_option("--sigma-end", c.sigma_end, "Final neighborhood range");
    app->add_flag("--supervised", c.supervised, "Blend class labels into the distance");
    app->add_option("--beta", c.beta, "Weight of the input distance when supervised");
    app->add_flag("--plain-ranks", c.plain_ranks, "Rank prototypes on the input distance only");
    app->add_option("--patches", c.patches, "Patch count for patch-ng");
    app->add_option("--multiplicity", c.multiplicity, "point or literal")->check(CLI::IsMember({"point", "literal"}));
    app->add_option("-s,--seed", c.seed, "Random seed");
    app->add_option("-m,--metric", c.metric, "sqeuclidean, cosine or edit");
    app->add_option("--indel", c.indel, "Insertion/deletion cost of the edit distance");
    app->add_flag("--standardize", c.standardize, "z-score the features first");
    app->add_flag("--sample-sd", c.sample_sd, "Standardize with the sample standard deviation");
    app->add_option("--lattice", c.lattice, "SOM grid as ROWSxCOLS");
    app->add_flag("--hex", c.hexagonal, "Hexagonal SOM grid");
    app->add_option("--ties", c.ties, "lowest-index, random or scan-order");
}

void add_split(CLI::App* app, ConfigOptions& c) {
    app->add_option("--split", c.split, "kfold or halves")->check(CLI::IsMember({"none", "kfold", "halves"}));
    app->add_option("--folds", c.folds, "Folds for k-fold");
    app->add_option("--repeats", c.repeats, "Repetitions");
    app->add_option("--stratified", c.stratified, "Stratify splits by class (true/false)");
    app->add_option("--train-fraction", c.train_fraction, "Training share for halves");
}

std::string config_json(const ConfigOptions& c) {
    nlohmann::ordered_json j;
    j["algorithm"] = c.algorithm;
    j["implementation"] = c.impl;
    j["k"] = c.k;
    j["epochs"] = c.epochs;
    j["sigma_start"] = c.sigma_start ? nlohmann::ordered_json(*c.sigma_start) : nlohmann::ordered_json(nullptr);
    j["sigma_end"] = c.sigma_end;
    j["supervised"] = c.supervised;
    j["beta"] = c.beta;
    j["blended_ranks"] = !c.plain_ranks;
    j["patches"] = c.patches;
    j["multiplicity"] = c.multiplicity;
    j["seed"] = c.seed;
    j["metric"] = c.metric;
    j["indel"] = c.indel;
    j["standardize"] = c.standardize;
    j["std_convention"] = c.sample_sd ? "sample" : "population";
    j["lattice_shape"] = c.hexagonal ? "hexagonal" : "rectangular";
    if (!c.lattice.empty()) {
        const auto x = c.lattice.find_first_of("xX");
        if (x == std::string::npos) throw CLI::ValidationError("--lattice", "expected ROWSxCOLS");
        try {
            j["lattice_rows"] = std::stoul(c.lattice.substr(0, x));
            j["lattice_cols"] = std::stoul(c.lattice.substr(x + 1));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--lattice", "expected ROWSxCOLS");
        }
    }
    j["ties"] = c.ties;
    j["split"] = c.split;
    j["folds"] = c.folds;
    j["repeats"] = c.repeats;
    j["stratified"] = c.stratified ? nlohmann::ordered_json(*c.stratified) : nlohmann::ordered_json(nullptr);
    j["train_fraction"] = c.train_fraction;
    return j.dump();
}

// Error raised from a library status; carries the exit code.
struct Failure {
    int code;
};

void check(mt_status s) {
    if (s != MT_OK) {
        std::cerr << "mediatop: " << mt_last_error() << '\n';
        throw Failure{static_cast<int>(s)};
    }
}

bool starts_with_magic(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    char magic[4] = {};
    return f.read(magic, 4) && std::string(magic, 4) == "DSM1";
}

struct Dataset {
    mt_dataset* handle = nullptr;
    ~Dataset() { mt_dataset_free(handle); }
};

struct Model {
    mt_model* handle = nullptr;
    ~Model() { mt_model_free(handle); }
};

struct OwnedString {
    char* s = nullptr;
    ~OwnedString() { mt_string_free(s); }
    std::string str() const { return s ? std::string(s) : std::string(); }
};

void load(Dataset& ds, const InputOptions& in, const std::string& metric) {
    std::string format = in.format;
    if (format == "auto") {
        if (starts_with_magic(in.path)) format = "matrix";
        else if (metric == "edit") format = "sequences";
        else format = "vectors";
    }
    const char* labels = in.labels.empty() ? nullptr : in.labels.c_str();
    if (format == "vectors") {
        check(mt_dataset_load_vectors(in.path.c_str(), in.no_label_column ? 0 : 1, &ds.handle));
    } else if (format == "sequences") {
        check(mt_dataset_load_sequences(in.path.c_str(), labels, &ds.handle));
    } else {
        check(mt_dataset_load_matrix(in.path.c_str(), labels, in.asymmetric ? 0 : 1, &ds.handle));
    }
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        std::cerr << "mediatop: cannot write " << path << '\n';
        throw Failure{2};
    }
    f << text;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        std::cerr << "mediatop: cannot read " << path << '\n';
        throw Failure{2};
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Median clustering of dissimilarity data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(mt_version()));

    InputOptions train_in, eval_in, bench_in, dist_in;
    ConfigOptions train_cfg, eval_cfg, bench_cfg, dist_cfg;
    std::string model_out, assign_out, report_out, bench_impls, bench_csv, dist_out, inspect_model, inspect_out;
    std::string inspect_input;
    bool dist_text = false;
    InputOptions inspect_in;

    auto* train = app.add_subcommand("train", "Train on all points");
    add_input(train, train_in);
    add_config(train, train_cfg);
    train->add_option("--model", model_out, "Model JSON output (default stdout)");
    train->add_option("--assignments", assign_out, "Assignments CSV output");
    train->add_option("--report", report_out, "Report JSON output");

    auto* evaluate = app.add_subcommand("evaluate", "Repeated held-out evaluation");
    add_input(evaluate, eval_in);
    add_config(evaluate, eval_cfg);
    add_split(evaluate, eval_cfg);
    evaluate->add_option("--report", report_out, "Report JSON output (default stdout)");

    auto* bench = app.add_subcommand("benchmark", "Per-epoch timing of search engines");
    add_input(bench, bench_in);
    add_config(bench, bench_cfg);
    bench->add_option("--impls", bench_impls, "Comma separated implementations")->required();
    bench->add_option("--output", bench_csv, "Timing table CSV (default stdout)");
    bench->add_option("--report", report_out, "Benchmark JSON output");

    auto* distance = app.add_subcommand("distance", "Write the all-pairs dissimilarity matrix");
    add_input(distance, dist_in);
    distance->add_option("-m,--metric", dist_cfg.metric, "sqeuclidean, cosine or edit");
    distance->add_option("--indel", dist_cfg.indel, "Insertion/deletion cost of the edit distance");
    distance->add_flag("--standardize", dist_cfg.standardize, "z-score the features first");
    distance->add_flag("--sample-sd", dist_cfg.sample_sd, "Standardize with the sample standard deviation");
    distance->add_option("-o,--output", dist_out, "Matrix file")->required();
    distance->add_flag("--text", dist_text, "Text format instead of binary");

    auto* inspect = app.add_subcommand("inspect", "Show a model and, with --input, its receptive fields");
    inspect->add_option("--model", inspect_model, "Model JSON")->required();
    inspect->add_option("-i,--input", inspect_in.path, "Data to assign");
    inspect->add_option("--format", inspect_in.format, "auto, vectors, sequences or matrix")
        ->check(CLI::IsMember({"auto", "vectors", "sequences", "matrix"}));
    inspect->add_option("--labels", inspect_in.labels, "Class name per line for sequence or matrix input");
    inspect->add_flag("--no-label-column", inspect_in.no_label_column, "Vector rows carry no trailing class name");
    inspect->add_flag("--asymmetric", inspect_in.asymmetric, "Matrix input is not symmetric");
    inspect->add_option("-o,--output", inspect_out, "Assignments CSV output (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*train) {
            Dataset ds;
            load(ds, train_in, train_cfg.metric);
            Model model;
            check(mt_train(ds.handle, config_json(train_cfg).c_str(), &model.handle));
            OwnedString js;
            check(mt_model_json(model.handle, &js.s));
            emit(js.str(), model_out);
            if (!assign_out.empty()) {
                OwnedString csv;
                check(mt_model_assignments_csv(model.handle, nullptr, &csv.s));
                emit(csv.str(), assign_out);
            }
            if (!report_out.empty()) {
                OwnedString rep;
                check(mt_model_report_json(model.handle, &rep.s));
                emit(rep.str(), report_out);
            }
        } else if (*evaluate) {
            if (eval_cfg.split == "none") eval_cfg.split = "kfold";
            Dataset ds;
            load(ds, eval_in, eval_cfg.metric);
            OwnedString rep;
            check(mt_evaluate(ds.handle, config_json(eval_cfg).c_str(), &rep.s));
            emit(rep.str(), report_out);
        } else if (*bench) {
            Dataset ds;
            load(ds, bench_in, bench_cfg.metric);
            OwnedString rep, csv;
            const mt_status s =
                mt_benchmark(ds.handle, config_json(bench_cfg).c_str(), bench_impls.c_str(), &rep.s, &csv.s);
            if (csv.s) emit(csv.str(), bench_csv);
            if (rep.s && !report_out.empty()) emit(rep.str(), report_out);
            check(s);
        } else if (*distance) {
            Dataset ds;
            load(ds, dist_in, dist_cfg.metric);
            dist_cfg.k = 1;
            check(mt_distance_write(ds.handle, config_json(dist_cfg).c_str(), dist_out.c_str(), dist_text ? 0 : 1));
        } else if (*inspect) {
            const std::string text = read_file(inspect_model);
            Model model;
            check(mt_model_from_json(text.c_str(), &model.handle));
            if (inspect_in.path.empty()) {
                OwnedString js;
                check(mt_model_json(model.handle, &js.s));
                emit(js.str(), inspect_out);
            } else {
                const auto cfg = nlohmann::json::parse(text).value("config", nlohmann::json::object());
                Dataset ds;
                load(ds, inspect_in, cfg.value("metric", std::string("sqeuclidean")));
                OwnedString csv;
                check(mt_model_assignments_csv(model.handle, ds.handle, &csv.s));
                emit(csv.str(), inspect_out);
            }
        }
    } catch (const Failure& f) {
        return f.code;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "mediatop: " << e.what() << '\n';
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "mediatop: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
