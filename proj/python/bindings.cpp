#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crowdstrata/bin_loss.hpp"
#include "crowdstrata/count_data.hpp"
#include "crowdstrata/error.hpp"
#include "crowdstrata/evaluation.hpp"
#include "crowdstrata/model_selection.hpp"
#include "crowdstrata/sampling.hpp"
#include "crowdstrata/serialize.hpp"
#include "crowdstrata/stratification.hpp"
#include "crowdstrata/synth.hpp"

namespace py = pybind11;
namespace cs = crowdstrata;

namespace {

using RecordTuple = std::pair<std::string, cs::Count>;

std::vector<cs::CountRecord> to_records(const std::vector<RecordTuple>& rows) {
    std::vector<cs::CountRecord> out;
    out.reserve(rows.size());
    for (const auto& [id, count] : rows) out.push_back({id, count});
    return out;
}

std::vector<RecordTuple> from_records(const std::vector<cs::CountRecord>& records) {
    std::vector<RecordTuple> out;
    out.reserve(records.size());
    for (const auto& r : records) out.emplace_back(r.id, r.count);
    return out;
}

cs::PriorConfig prior(double gamma, std::optional<int> alpha) { return cs::PriorConfig{gamma, alpha}; }

cs::GridSpec grid(std::vector<double> gammas, std::vector<double> ratios, int n_seeds, cs::Count beta,
                  const std::string& likelihood, std::optional<int> alpha) {
    cs::GridSpec g;
    g.gammas = std::move(gammas);
    g.ratios = std::move(ratios);
    g.n_seeds = n_seeds;
    g.beta = beta;
    g.likelihood = cs::parse_likelihood(likelihood);
    g.alpha = alpha;
    return g;
}

py::dict selection_dict(const cs::GammaSelection& sel) {
    py::dict d;
    d["gamma_best"] = sel.gamma_best;
    d["gammas"] = sel.gammas;
    d["ratios"] = sel.ratios;
    py::list table;
    for (const auto& c : sel.table) table.append(py::make_tuple(c.gamma, c.ratio, c.mean_loglik));
    d["table"] = table;
    d["rank_indices"] = sel.rank_indices;
    d["index_sums"] = sel.index_sums;
    return d;
}

const std::vector<double> kGammas = cs::GridSpec{}.gammas;
const std::vector<double> kRatios = cs::GridSpec{}.ratios;

}  // namespace

PYBIND11_MODULE(_crowdstrata, m) {
    m.doc() = "Bayesian count stratification, balanced minibatch plans, bin loss and per-bin evaluation";

    py::register_exception<cs::ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<cs::ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<cs::ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<cs::RangeError>(m, "RangeError", PyExc_IndexError);

    py::class_<cs::CountHistogram>(m, "CountHistogram")
        .def(py::init<std::vector<cs::Count>, cs::Count>(), py::arg("freqs"), py::arg("beta") = 0)
        .def_property_readonly("max_count", &cs::CountHistogram::max_count)
        .def_property_readonly("freqs", &cs::CountHistogram::freqs)
        .def_property_readonly("beta", &cs::CountHistogram::smoothing_beta)
        .def_property_readonly("total", &cs::CountHistogram::total)
        .def("to_json", &cs::histogram_json)
        .def("__repr__", [](const cs::CountHistogram& h) {
            return "CountHistogram(max_count=" + std::to_string(h.max_count()) + ", total=" +
                   std::to_string(h.total()) + ")";
        });

    py::class_<cs::Partition>(m, "Partition")
        .def_property_readonly("bins",
                               [](const cs::Partition& p) {
                                   std::vector<std::pair<cs::Count, cs::Count>> out;
                                   for (const auto& b : p.bins) out.emplace_back(b.lo, b.hi);
                                   return out;
                               })
        .def_readonly("map_score", &cs::Partition::map_score)
        .def_readonly("gamma", &cs::Partition::gamma_used)
        .def_readonly("alpha", &cs::Partition::alpha)
        .def_readonly("beta", &cs::Partition::beta)
        .def_property_readonly("likelihood", [](const cs::Partition& p) { return std::string(cs::to_string(p.likelihood)); })
        .def("__len__", &cs::Partition::size)
        .def("to_json", &cs::partition_json)
        .def_static("from_json", &cs::parse_partition_json);

    m.def("ingest_counts", [](const std::string& text) { return from_records(cs::ingest_counts(text)); },
          py::arg("text"));
    m.def("build_histogram",
          [](const std::vector<RecordTuple>& rows, std::optional<cs::Count> max_count) {
              return cs::build_histogram(to_records(rows), max_count);
          },
          py::arg("records"), py::arg("max_count") = py::none());
    m.def("smooth", &cs::smooth, py::arg("hist"), py::arg("beta") = cs::kDefaultBeta);

    m.def("prior_log_prob", [](int n_bins, double gamma, int alpha) { return cs::prior_log_prob(n_bins, prior(gamma, alpha)); },
          py::arg("n_bins"), py::arg("gamma"), py::arg("alpha"));
    m.def("bin_log_likelihood",
          [](const cs::CountHistogram& h, cs::Count lo, cs::Count hi, const std::string& kind) {
              return cs::bin_log_likelihood(h, lo, hi, cs::parse_likelihood(kind));
          },
          py::arg("hist"), py::arg("lo"), py::arg("hi"), py::arg("likelihood") = "multinomial");
    m.def("partition_log_score",
          [](const cs::CountHistogram& h, const std::vector<std::pair<cs::Count, cs::Count>>& bins, double gamma,
             std::optional<int> alpha, const std::string& kind) {
              std::vector<cs::Bin> bs;
              for (const auto& [lo, hi] : bins) bs.push_back({lo, hi});
              return cs::partition_log_score(h, bs, prior(gamma, alpha), cs::parse_likelihood(kind));
          },
          py::arg("hist"), py::arg("bins"), py::arg("gamma"), py::arg("alpha") = py::none(),
          py::arg("likelihood") = "multinomial");
    m.def("optimal_partition",
          [](const cs::CountHistogram& h, double gamma, std::optional<int> alpha, const std::string& kind) {
              return cs::optimal_partition(h, prior(gamma, alpha), cs::parse_likelihood(kind));
          },
          py::arg("hist"), py::arg("gamma"), py::arg("alpha") = py::none(), py::arg("likelihood") = "multinomial");
    m.def("brute_force_partition",
          [](const cs::CountHistogram& h, double gamma, std::optional<int> alpha, const std::string& kind) {
              return cs::brute_force_partition(h, prior(gamma, alpha), cs::parse_likelihood(kind));
          },
          py::arg("hist"), py::arg("gamma"), py::arg("alpha") = py::none(), py::arg("likelihood") = "multinomial");

    m.def("split_records",
          [](const std::vector<RecordTuple>& rows, double ratio, std::uint64_t seed) {
              auto [train, test] = cs::split_records(to_records(rows), ratio, seed);
              return std::make_pair(from_records(train), from_records(test));
          },
          py::arg("records"), py::arg("ratio"), py::arg("seed"));
    m.def("select_gamma",
          [](const std::vector<RecordTuple>& rows, std::vector<double> gammas, std::vector<double> ratios, int n_seeds,
             cs::Count beta, const std::string& kind, std::optional<int> alpha) {
              return selection_dict(
                  cs::select_gamma(to_records(rows), grid(std::move(gammas), std::move(ratios), n_seeds, beta, kind, alpha)));
          },
          py::arg("records"), py::arg("gammas") = kGammas, py::arg("ratios") = kRatios, py::arg("n_seeds") = 10,
          py::arg("beta") = cs::kDefaultBeta, py::arg("likelihood") = "multinomial", py::arg("alpha") = py::none());
    m.def("optimal_bins",
          [](const std::vector<RecordTuple>& rows, std::vector<double> gammas, std::vector<double> ratios, int n_seeds,
             cs::Count beta, const std::string& kind, std::optional<int> alpha) {
              return cs::optimal_bins(to_records(rows),
                                      grid(std::move(gammas), std::move(ratios), n_seeds, beta, kind, alpha));
          },
          py::arg("records"), py::arg("gammas") = kGammas, py::arg("ratios") = kRatios, py::arg("n_seeds") = 10,
          py::arg("beta") = cs::kDefaultBeta, py::arg("likelihood") = "multinomial", py::arg("alpha") = py::none());

    m.def("plan_epoch",
          [](const std::vector<RecordTuple>& rows, const cs::Partition& p, const std::string& scheme,
             std::size_t batch_size, std::uint64_t seed) {
              return cs::plan_epoch(cs::assign_bins(to_records(rows), p), cs::parse_scheme(scheme), batch_size, seed)
                  .batches;
          },
          py::arg("records"), py::arg("partition"), py::arg("scheme") = "rr", py::arg("batch_size") = 32,
          py::arg("seed") = 0);

    m.def("bin_loss",
          [](double y, double y_hat, std::pair<cs::Count, cs::Count> bin, double lambda1) {
              return cs::bin_loss(y, y_hat, {bin.first, bin.second}, lambda1);
          },
          py::arg("y"), py::arg("y_hat"), py::arg("bin"), py::arg("lambda1") = 1.0);
    m.def("bin_loss_subgradient",
          [](double y, double y_hat, std::pair<cs::Count, cs::Count> bin, double lambda1) {
              return cs::bin_loss_subgradient(y, y_hat, {bin.first, bin.second}, lambda1);
          },
          py::arg("y"), py::arg("y_hat"), py::arg("bin"), py::arg("lambda1") = 1.0);
    m.def("combined_loss",
          [](double model_loss, double y, double y_hat, std::pair<cs::Count, cs::Count> bin, double lambda1,
             double lambda2) {
              return cs::combined_loss(model_loss, y, y_hat, {bin.first, bin.second}, {lambda1, lambda2});
          },
          py::arg("model_loss"), py::arg("y"), py::arg("y_hat"), py::arg("bin"), py::arg("lambda1") = 1.0,
          py::arg("lambda2") = 1.0);

    m.def("evaluate",
          [](const std::vector<std::tuple<std::string, cs::Count, double>>& rows, const cs::Partition& p) {
              std::vector<cs::PredictionRecord> preds;
              for (const auto& [id, y, y_hat] : rows) preds.push_back({id, y, y_hat});
              return cs::report_json(cs::evaluate(preds, p));
          },
          py::arg("predictions"), py::arg("partition"),
          "Per-bin, pooled and global statistics as report JSON text.");

    m.def("run_comparison",
          [](std::size_t n_seeds, std::uint64_t first_seed, std::size_t n_samples, std::size_t epochs) {
              cs::SynthSpec spec;
              spec.n_samples = n_samples;
              cs::TrainerConfig trainer;
              trainer.epochs = epochs;
              std::vector<std::uint64_t> seeds(n_seeds);
              for (std::size_t i = 0; i < n_seeds; ++i) seeds[i] = first_seed + i;
              return cs::comparison_json(cs::run_comparison(spec, {}, trainer, seeds));
          },
          py::arg("n_seeds") = 10, py::arg("first_seed") = 0, py::arg("n_samples") = cs::SynthSpec{}.n_samples,
          py::arg("epochs") = cs::TrainerConfig{}.epochs, "Synthetic comparison report as JSON text.");
}
