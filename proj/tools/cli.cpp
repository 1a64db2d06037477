#include "cli.hpp"

#include <CLI11.hpp>
#include <iostream>

#include "crowdstrata/bin_loss.hpp"
#include "crowdstrata/count_data.hpp"
#include "crowdstrata/evaluation.hpp"
#include "crowdstrata/model_selection.hpp"
#include "crowdstrata/sampling.hpp"
#include "crowdstrata/serialize.hpp"
#include "crowdstrata/synth.hpp"
#include "crowdstrata/text.hpp"

namespace crowdstrata::cli {

namespace {

struct GridFlags {
    std::vector<double> gammas = GridSpec{}.gammas;
    std::vector<double> ratios = GridSpec{}.ratios;
    int cv_seeds = GridSpec{}.n_seeds;
    Count beta = kDefaultBeta;
    std::string likelihood = "multinomial";
    int alpha = 0;
    unsigned threads = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--gammas", gammas, "Gamma grid")->delimiter(',')->capture_default_str();
        cmd->add_option("--ratios", ratios, "Held-out fractions")->delimiter(',')->capture_default_str();
        cmd->add_option("--cv-seeds", cv_seeds, "Cross-validation repeats (seeds 0..n-1)")->capture_default_str();
        add_common(cmd);
        cmd->add_option("--alpha", alpha, "Cap on the number of bins (0 = number of cells)")->capture_default_str();
        cmd->add_option("--threads", threads, "Grid worker threads (0 = auto)")->capture_default_str();
    }

    void add_common(CLI::App* cmd) {
        cmd->add_option("--beta", beta, "Additive smoothing")->capture_default_str()->check(CLI::NonNegativeNumber);
        cmd->add_option("--likelihood", likelihood, "Bin likelihood")
            ->capture_default_str()
            ->check(CLI::IsMember({"multinomial", "poisson"}));
    }

    [[nodiscard]] GridSpec spec() const {
        GridSpec s;
        s.gammas = gammas;
        s.ratios = ratios;
        s.n_seeds = cv_seeds;
        s.beta = beta;
        s.likelihood = parse_likelihood(likelihood);
        if (alpha > 0) s.alpha = alpha;
        s.threads = threads;
        return s;
    }
};

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-")
        out << content;
    else
        write_file(path, content);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayesian count stratification: optimal bins, balanced minibatch plans, bin loss and per-bin evaluation"};
    app.name(args.empty() ? "crowdstrata" : args.front());
    app.require_subcommand(1);

    // bin / tune
    std::string counts_path, output;
    GridFlags grid;
    double gamma = 0.5;
    bool no_tune = false;
    auto* bin_cmd = app.add_subcommand("bin", "Compute optimal bins for a counts CSV and write partition JSON");
    bin_cmd->add_option("counts", counts_path, "CSV with header id,count")->required()->check(CLI::ExistingFile);
    bin_cmd->add_option("-o,--output", output, "Output path (default stdout)");
    grid.attach(bin_cmd);
    bin_cmd->add_option("--gamma", gamma, "Prior parameter used with --no-tune")->capture_default_str();
    bin_cmd->add_flag("--no-tune", no_tune, "Skip the grid search and use --gamma");

    auto* tune_cmd = app.add_subcommand("tune", "Run the gamma grid search and write the tuning report JSON");
    tune_cmd->add_option("counts", counts_path, "CSV with header id,count")->required()->check(CLI::ExistingFile);
    tune_cmd->add_option("-o,--output", output, "Output path (default stdout)");
    grid.attach(tune_cmd);

    // plan
    std::string partition_path, scheme = "rr";
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    auto* plan_cmd = app.add_subcommand("plan", "Write one epoch's minibatch plan as JSON");
    plan_cmd->add_option("counts", counts_path, "CSV with header id,count")->required()->check(CLI::ExistingFile);
    plan_cmd->add_option("partition", partition_path, "Partition JSON")->required()->check(CLI::ExistingFile);
    plan_cmd->add_option("-o,--output", output, "Output path (default stdout)");
    plan_cmd->add_option("--scheme", scheme, "rr (round robin) or rs (random bin)")
        ->capture_default_str()
        ->check(CLI::IsMember({"rr", "rs"}));
    plan_cmd->add_option("--batch-size", batch_size, "Minibatch size")->capture_default_str()->check(CLI::PositiveNumber);
    plan_cmd->add_option("--seed", seed, "Sampling seed")->capture_default_str();

    // loss
    std::string preds_path;
    LossConfig loss_cfg;
    int decimals = 4;
    auto* loss_cmd = app.add_subcommand("loss", "Per-record bin loss CSV");
    loss_cmd->add_option("predictions", preds_path, "CSV with header id,count_true,count_pred")
        ->required()
        ->check(CLI::ExistingFile);
    loss_cmd->add_option("partition", partition_path, "Partition JSON")->required()->check(CLI::ExistingFile);
    loss_cmd->add_option("-o,--output", output, "Output path (default stdout)");
    loss_cmd->add_option("--lambda1", loss_cfg.lambda1, "Weight of the in-bin log branch")->capture_default_str();
    loss_cmd->add_option("--lambda2", loss_cfg.lambda2, "Weight of the bin loss term")->capture_default_str();
    loss_cmd->add_option("--decimals", decimals, "Digits after the point in bin_loss")->capture_default_str();

    // eval
    std::string report_path, plot_path;
    auto* eval_cmd = app.add_subcommand("eval", "Per-bin, pooled and global error statistics");
    eval_cmd->add_option("predictions", preds_path, "CSV with header id,count_true,count_pred")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("partition", partition_path, "Partition JSON")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--report", report_path, "Report JSON path (default stdout)");
    eval_cmd->add_option("--plot", plot_path, "Plot-ready CSV path");

    // synth
    SynthSpec synth;
    TrainerConfig trainer;
    PartitionConfig part_cfg;
    std::size_t n_seeds = 10;
    bool tune = false;
    auto* synth_cmd = app.add_subcommand("synth", "Synthetic comparison of no-binning, RR and RS training");
    synth_cmd->add_option("-o,--output", output, "Report JSON path (default stdout)");
    synth_cmd->add_option("--n-samples", synth.n_samples, "Samples per dataset")->capture_default_str();
    synth_cmd->add_option("--log-mean", synth.log_mean, "Mean of log counts")->capture_default_str();
    synth_cmd->add_option("--log-sigma", synth.log_sigma, "Spread of log counts")->capture_default_str();
    synth_cmd->add_option("--max-count", synth.max_count, "Count cap")->capture_default_str();
    synth_cmd->add_option("--noise-spread", synth.noise_spread, "Multiplicative feature noise")->capture_default_str();
    synth_cmd->add_option("--bias", synth.bias, "Additive feature bias")->capture_default_str();
    synth_cmd->add_option("--seeds", n_seeds, "Number of seeds")->capture_default_str();
    synth_cmd->add_option("--seed", seed, "First seed; runs use seed..seed+seeds-1")->capture_default_str();
    synth_cmd->add_option("--epochs", trainer.epochs, "Training epochs")->capture_default_str();
    synth_cmd->add_option("--batch-size", trainer.batch_size, "Minibatch size")->capture_default_str();
    synth_cmd->add_option("--lr", trainer.learning_rate, "Base learning rate")->capture_default_str();
    synth_cmd->add_option("--holdout", trainer.holdout, "Held-out fraction")->capture_default_str();
    synth_cmd->add_option("--lambda1", trainer.loss.lambda1, "Weight of the in-bin log branch")->capture_default_str();
    synth_cmd->add_option("--lambda2", trainer.loss.lambda2, "Weight of the bin loss term")->capture_default_str();
    synth_cmd->add_option("--gamma", part_cfg.gamma, "Prior parameter when not tuning")->capture_default_str();
    synth_cmd->add_flag("--tune", tune, "Grid-search gamma on each training split");
    grid.add_common(synth_cmd);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        // usage errors exit with 2; --help exits with 0
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        if (*bin_cmd) {
            const auto records = ingest_counts(read_file(counts_path));
            const GridSpec spec = grid.spec();
            Partition partition;
            if (no_tune) {
                const CountHistogram hist = smooth(build_histogram(records), spec.beta);
                partition = optimal_partition(hist, PriorConfig{gamma, spec.alpha}, spec.likelihood);
            } else {
                partition = optimal_bins(records, spec);
            }
            emit(output, partition_json(partition), out);
        } else if (*tune_cmd) {
            const auto records = ingest_counts(read_file(counts_path));
            emit(output, selection_json(select_gamma(records, grid.spec())), out);
        } else if (*plan_cmd) {
            const Scheme s = parse_scheme(scheme);
            const auto records = ingest_counts(read_file(counts_path));
            const Partition partition = parse_partition_json(read_file(partition_path));
            const BinAssignment assignment = assign_bins(records, partition);
            if (assignment.clamped())
                err << "warning: " << assignment.clamped_ids.size()
                    << " record(s) above the partition range were placed in the last bin\n";
            emit(output, plan_json(plan_epoch(assignment, s, batch_size, seed)), out);
        } else if (*loss_cmd) {
            const auto preds = ingest_predictions(read_file(preds_path));
            const Partition partition = parse_partition_json(read_file(partition_path));
            emit(output, loss_csv(preds, partition, loss_cfg, decimals), out);
        } else if (*eval_cmd) {
            const auto preds = ingest_predictions(read_file(preds_path));
            const Partition partition = parse_partition_json(read_file(partition_path));
            const EvalReport report = evaluate(preds, partition);
            emit(report_path, report_json(report), out);
            if (!plot_path.empty()) write_file(plot_path, render_report(report, partition));
        } else if (*synth_cmd) {
            part_cfg.tune = tune;
            part_cfg.grid = grid.spec();
            std::vector<std::uint64_t> seeds(n_seeds);
            for (std::size_t i = 0; i < n_seeds; ++i) seeds[i] = seed + i;
            emit(output, comparison_json(run_comparison(synth, part_cfg, trainer, seeds)), out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace crowdstrata::cli
