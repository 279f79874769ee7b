// sic: synthesize datasets, train and evaluate cancelers, report complexity.

#include <sic/app.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using sic::app::json;

struct CommonFlags {
    std::string config;
    std::string out_dir;
    std::string dataset;
    std::optional<long long> samples;
    std::optional<int> memory;
    std::optional<std::string> kind;
    std::optional<int> N, M, W, P;
    std::optional<double> ridge;
    std::optional<double> lr;
    std::optional<int> batch;
    std::optional<int> epochs;
    std::optional<std::uint64_t> seed;
    std::optional<int> seeds;
    std::optional<std::uint64_t> tx_seed;
    std::optional<double> noise;
    bool cv = false;
    std::vector<int> sweep_N, sweep_W;
    std::optional<std::string> sweep_kind;
    std::optional<int> cap, workers;
};

void add_config_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("-c,--config", f.config, "Experiment config file (JSON)");
    cmd->add_option("-o,--out-dir", f.out_dir, "Output directory (output.dir)");
}

void add_dataset_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("-d,--dataset", f.dataset, "Dataset file; sets dataset.source=file");
    cmd->add_option("--samples", f.samples, "Synthetic sample count (dataset.samples)");
    cmd->add_option("--memory", f.memory, "Dataset memory length (dataset.memory)");
    cmd->add_option("--tx-seed", f.tx_seed, "Synthesis seed (dataset.tx.seed)");
    cmd->add_option("--noise", f.noise, "Receiver noise power (dataset.tx.noise_power)");
}

void add_model_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--kind", f.kind, "linear | poly | ffnn | lwgs | mwgs (canceler.kind)");
    cmd->add_option("--N", f.N, "Hidden neurons (canceler.N)");
    cmd->add_option("--M", f.M, "Memory taps (canceler.M)");
    cmd->add_option("--W", f.W, "MWGS window (canceler.W)");
    cmd->add_option("--P", f.P, "Polynomial order (canceler.P)");
    cmd->add_option("--ridge", f.ridge, "Polynomial ridge, negative = default (canceler.ridge)");
    cmd->add_option("--lr", f.lr, "Learning rate (hyper.lr)");
    cmd->add_option("--batch", f.batch, "Batch size (hyper.batch)");
    cmd->add_option("--epochs", f.epochs, "Epochs (hyper.epochs)");
    cmd->add_option("--seed", f.seed, "Base seed (protocol.base_seed)");
    cmd->add_option("--seeds", f.seeds, "Seed count (protocol.n_seeds)");
    cmd->add_flag("--cv", f.cv, "Select lr/batch by k-fold cross-validation (protocol.cv)");
}

json flag_patch(const CommonFlags& f) {
    json p = json::object();
    if (!f.out_dir.empty()) p["output"]["dir"] = f.out_dir;
    if (!f.dataset.empty()) {
        p["dataset"]["source"] = "file";
        p["dataset"]["path"] = f.dataset;
    }
    if (f.samples) p["dataset"]["samples"] = *f.samples;
    if (f.memory) p["dataset"]["memory"] = *f.memory;
    if (f.tx_seed) p["dataset"]["tx"]["seed"] = *f.tx_seed;
    if (f.noise) p["dataset"]["tx"]["noise_power"] = *f.noise;
    if (f.kind) p["canceler"]["kind"] = *f.kind;
    if (f.N) p["canceler"]["N"] = *f.N;
    if (f.M) p["canceler"]["M"] = *f.M;
    if (f.W) p["canceler"]["W"] = *f.W;
    if (f.P) p["canceler"]["P"] = *f.P;
    if (f.ridge) p["canceler"]["ridge"] = *f.ridge;
    if (f.lr) p["hyper"]["lr"] = *f.lr;
    if (f.batch) p["hyper"]["batch"] = *f.batch;
    if (f.epochs) p["hyper"]["epochs"] = *f.epochs;
    if (f.seed) p["protocol"]["base_seed"] = *f.seed;
    if (f.seeds) p["protocol"]["n_seeds"] = *f.seeds;
    if (f.cv) p["protocol"]["cv"] = true;
    if (f.sweep_kind) p["sweep"]["kind"] = *f.sweep_kind;
    if (!f.sweep_N.empty()) p["sweep"]["N"] = f.sweep_N;
    if (!f.sweep_W.empty()) p["sweep"]["W"] = f.sweep_W;
    if (f.cap) p["sweep"]["cap"] = *f.cap;
    if (f.workers) p["sweep"]["workers"] = *f.workers;
    return p;
}

sic::app::ExperimentConfig load_config(const CommonFlags& f) {
    json user = f.config.empty() ? json::object() : sic::app::read_json_file(f.config);
    if (!user.is_object()) throw sic::ConfigError("config file must hold a JSON object");
    json merged = user;
    merged.merge_patch(flag_patch(f)); // flags override file values
    return sic::app::resolve_config(merged);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Digital self-interference cancellation workbench"};
    app.set_version_flag("--version", sic::app::kVersion);
    app.require_subcommand(1);

    CommonFlags f;
    std::string out_file;

    auto* synth = app.add_subcommand("synth", "Synthesize a dataset from the transmitter impairment model");
    add_config_flags(synth, f);
    add_dataset_flags(synth, f);
    synth->add_option("--out", out_file, "Dataset file to write (default <out-dir>/dataset.sic)");

    std::string csv_path;
    int import_memory = 13;
    auto* import = app.add_subcommand("import", "Convert a CSV capture (x_re,x_im,y_re,y_im) to a dataset file");
    import->add_option("csv", csv_path, "CSV file")->required();
    import->add_option("--memory", import_memory, "Memory length stored in the dataset");
    import->add_option("--out", out_file, "Dataset file to write (default <csv stem>.sic)");

    auto* train = app.add_subcommand("train", "Fit the linear stage and train or fit the nonlinear stage");
    add_config_flags(train, f);
    add_dataset_flags(train, f);
    add_model_flags(train, f);

    std::string model_path, eval_dataset, eval_out = ".";
    double eval_fraction = 0.0;
    auto* eval = app.add_subcommand("eval", "Evaluate a saved model on the test split of a dataset");
    eval->add_option("-m,--model", model_path, "Model file")->required();
    eval->add_option("-d,--dataset", eval_dataset, "Dataset file")->required();
    eval->add_option("--train-fraction", eval_fraction, "Split fraction (default: value recorded in the model)");
    eval->add_option("-o,--out-dir", eval_out, "Directory for eval.json");

    sic::app::FlopsOptions fopt;
    std::string flops_out;
    auto* flops = app.add_subcommand("flops", "Complexity table (parameters and FLOPs)");
    flops->add_option("--spec", fopt.specs, "Canceler tokens: poly5 ffnn7 lwgs9 mwgs12x5 linear");
    flops->add_option("--baseline", fopt.baseline, "Token of the reference row for percentage columns");
    flops->add_option("--M", fopt.M, "Memory taps");
    flops->add_option("--format", fopt.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    flops->add_option("-o,--out-dir", flops_out, "Also write complexity.csv and complexity.json here");

    auto* sweep = app.add_subcommand("sweep", "Multi-seed runs over lists of N (and W)");
    add_config_flags(sweep, f);
    add_dataset_flags(sweep, f);
    add_model_flags(sweep, f);
    sweep->add_option("--sweep-kind", f.sweep_kind, "ffnn | lwgs | mwgs (sweep.kind)");
    sweep->add_option("--sweep-N", f.sweep_N, "Hidden neuron counts (sweep.N)");
    sweep->add_option("--sweep-W", f.sweep_W, "Window widths (sweep.W)");
    sweep->add_option("--cap", f.cap, "Maximum number of combinations (sweep.cap)");
    sweep->add_option("--workers", f.workers, "Concurrent trials (sweep.workers)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : sic::app::exit_config;
    }

    return sic::app::guarded([&] {
        if (*synth) {
            sic::app::cmd_synth(load_config(f), out_file, std::cout);
        } else if (*import) {
            sic::app::cmd_import(csv_path, import_memory, out_file, std::cout);
        } else if (*train) {
            sic::app::cmd_train(load_config(f), std::cout);
        } else if (*eval) {
            sic::app::cmd_eval(model_path, eval_dataset, eval_fraction, eval_out, std::cout);
        } else if (*flops) {
            const auto rows = sic::app::cmd_flops(fopt, std::cout);
            if (!flops_out.empty()) {
                sic::app::write_text(std::filesystem::path(flops_out) / "complexity.csv", sic::report_csv(rows));
                sic::app::write_text(std::filesystem::path(flops_out) / "complexity.json",
                                     sic::report_json(rows).dump(2) + "\n");
            }
        } else if (*sweep) {
            sic::app::cmd_sweep(load_config(f), std::cout);
        }
    });
}
