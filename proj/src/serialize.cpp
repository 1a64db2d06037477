#include "crowdstrata/serialize.hpp"

#include <sstream>

#include <json.hpp>

#include "crowdstrata/bin_loss.hpp"
#include "crowdstrata/error.hpp"
#include "crowdstrata/synth.hpp"
#include "crowdstrata/text.hpp"

namespace crowdstrata {

using Json = nlohmann::ordered_json;

namespace {

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json optional_real(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json report_to_json(const EvalReport& report) {
    Json bins = Json::array();
    for (const auto& s : report.per_bin)
        bins.push_back({{"lo", s.bin.lo}, {"hi", s.bin.hi}, {"n", s.n}, {"mae", optional_real(s.mae)},
                        {"std", optional_real(s.std)}});
    Json j;
    j["n_total"] = report.n_total;
    j["per_bin"] = std::move(bins);
    j["pooled"] = {{"mae", report.pooled_mae}, {"std", report.pooled_std}};
    j["global"] = {{"mae", report.global_mae}, {"std", report.global_std}};
    return j;
}

Json partition_to_json(const Partition& p) {
    Json bins = Json::array();
    for (const auto& b : p.bins) bins.push_back({{"lo", b.lo}, {"hi", b.hi}});
    Json j;
    j["gamma"] = p.gamma_used;
    j["alpha"] = p.alpha;
    j["beta"] = p.beta;
    j["likelihood"] = std::string(to_string(p.likelihood));
    j["map_score"] = p.map_score;
    j["bins"] = std::move(bins);
    return j;
}

}  // namespace

std::string histogram_json(const CountHistogram& hist) {
    Json j;
    j["max_count"] = hist.max_count();
    j["beta"] = hist.smoothing_beta();
    j["freqs"] = hist.freqs();
    return dump(j);
}

std::string partition_json(const Partition& partition) { return dump(partition_to_json(partition)); }

Partition parse_partition_json(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("partition JSON: ") + e.what());
    }
    try {
        Partition p;
        p.gamma_used = j.at("gamma").get<double>();
        p.alpha = j.at("alpha").get<int>();
        p.beta = j.at("beta").get<Count>();
        p.likelihood = parse_likelihood(j.at("likelihood").get<std::string>());
        p.map_score = j.at("map_score").is_null() ? 0.0 : j.at("map_score").get<double>();
        for (const auto& b : j.at("bins")) p.bins.push_back({b.at("lo").get<Count>(), b.at("hi").get<Count>()});
        p.validate();
        return p;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("partition JSON: ") + e.what());
    }
}

std::string selection_json(const GammaSelection& selection) {
    Json table = Json::array();
    for (const auto& c : selection.table)
        table.push_back({{"gamma", c.gamma}, {"ratio", c.ratio}, {"mean_loglik", c.mean_loglik}});
    Json sums = Json::object();
    for (std::size_t g = 0; g < selection.gammas.size(); ++g)
        sums[format_real(selection.gammas[g])] = selection.index_sums[g];
    Json j;
    j["gamma_best"] = selection.gamma_best;
    j["table"] = std::move(table);
    j["index_sums"] = std::move(sums);
    return dump(j);
}

std::string plan_json(const BatchPlan& plan) {
    Json j;
    j["scheme"] = std::string(to_string(plan.scheme));
    j["batch_size"] = plan.batch_size;
    j["seed"] = plan.seed;
    j["batches"] = plan.batches;
    return dump(j);
}

std::string report_json(const EvalReport& report) { return dump(report_to_json(report)); }

std::string comparison_json(const ComparisonReport& report) {
    Json runs = Json::array();
    for (const auto& run : report.runs) {
        Json schemes = Json::array();
        for (const auto& s : run.schemes) {
            schemes.push_back({{"scheme", s.name},
                               {"slope", s.model.slope},
                               {"intercept", s.model.intercept},
                               {"feature_scale", s.model.feature_scale},
                               {"report", report_to_json(s.report)}});
        }
        runs.push_back({{"seed", run.seed}, {"partition", partition_to_json(run.partition)}, {"schemes", schemes}});
    }
    Json j;
    j["seeds"] = report.seeds;
    j["wins"] = {{"any", report.wins}, {"rr", report.rr_wins}, {"rs", report.rs_wins}, {"of", report.seeds.size()}};
    j["runs"] = std::move(runs);
    return dump(j);
}

std::string loss_csv(const std::vector<PredictionRecord>& preds, const Partition& partition, const LossConfig& cfg,
                     int decimals) {
    partition.validate();
    cfg.validate();
    std::ostringstream out;
    out << "id,y,y_hat,bin_lo,bin_hi,bin_loss\n";
    for (const auto& p : preds) {
        const Bin bin = loss_bin(partition, p.y);
        const double loss = cfg.lambda2 * bin_loss(static_cast<double>(p.y), p.y_hat, bin, cfg.lambda1);
        out << p.id << ',' << p.y << ',' << format_real(p.y_hat) << ',' << bin.lo << ',' << bin.hi << ','
            << format_fixed(loss, decimals) << '\n';
    }
    return out.str();
}

}  // namespace crowdstrata
