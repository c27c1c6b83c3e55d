// Python bindings for the core operations: dataset ingestion, heterogeneity
// estimation, the Edgington confidence distribution, predictive sampling,
// interval summaries, and CRPS scoring.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "edgemeta/data_model.hpp"
#include "edgemeta/edgington.hpp"
#include "edgemeta/heterogeneity.hpp"
#include "edgemeta/predictive.hpp"
#include "edgemeta/scoring.hpp"
#include "edgemeta/simulation.hpp"

namespace py = pybind11;
using namespace edgemeta;

namespace {

MetaDataset make_dataset(const std::vector<std::pair<double, double>>& effect_variance) {
    std::vector<Study> studies;
    studies.reserve(effect_variance.size());
    for (const auto& [effect, variance] : effect_variance) {
        studies.push_back(Study{effect, variance, "", std::nullopt});
    }
    return validate_dataset(std::move(studies));
}

Tau2Method parse_tau2_method(const std::string& name) {
    if (name == "pm") return Tau2Method::PauleMandel;
    if (name == "reml") return Tau2Method::Reml;
    throw ValidationError("unknown tau2 method '" + name + "' (use 'pm' or 'reml')");
}

PcdVariant parse_variant(const std::string& name) {
    if (name == "fixed") return PcdVariant::Fixed;
    if (name == "simplified") return PcdVariant::Simplified;
    if (name == "full") return PcdVariant::Full;
    throw ValidationError("unknown variant '" + name +
                          "' (use 'fixed', 'simplified' or 'full')");
}

py::dict interval_dict(const PredictionInterval& pi) {
    py::dict d;
    d["lower"] = pi.lower;
    d["upper"] = pi.upper;
    d["level"] = pi.level;
    d["width"] = pi.width();
    return d;
}

}  // namespace

PYBIND11_MODULE(_edgemeta, m) {
    m.doc() = "Random-effects meta-analysis prediction via p-value combination";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<MetaDataset>(m, "Dataset")
        .def(py::init(&make_dataset), py::arg("effect_variance"),
             "Build a dataset from (effect, variance) pairs")
        .def("__len__", &MetaDataset::size)
        .def_property_readonly("effects", [](const MetaDataset& d) {
            std::vector<double> out;
            for (const Study& s : d.studies()) out.push_back(s.effect);
            return out;
        })
        .def_property_readonly("variances", [](const MetaDataset& d) {
            std::vector<double> out;
            for (const Study& s : d.studies()) out.push_back(s.variance);
            return out;
        });

    m.def("read_csv", &read_csv, py::arg("path"), py::arg("continuity_correction") = false);
    m.def("parse_csv", &parse_csv, py::arg("content"),
          py::arg("continuity_correction") = false);

    m.def(
        "estimate_tau2",
        [](const MetaDataset& data, const std::string& method, double ci_level) {
            const Tau2Estimate est = estimate_tau2(data, parse_tau2_method(method), ci_level);
            py::dict d;
            d["value"] = est.value;
            d["method"] = method;
            if (est.ci) d["ci"] = py::make_tuple(est.ci->first, est.ci->second);
            d["ci_level"] = est.ci_level;
            if (est.i2) d["i2_percent"] = *est.i2;
            return d;
        },
        py::arg("data"), py::arg("method") = "pm", py::arg("ci_level") = 0.95);

    m.def("generalized_q", &generalized_q, py::arg("data"), py::arg("tau2"));
    m.def("higgins_i2", &higgins_i2, py::arg("data"));

    m.def(
        "mean_hksj",
        [](const MetaDataset& data, double tau2, double level) {
            const MeanEstimate est = ivw_mean_hksj(data, tau2, level);
            py::dict d;
            d["value"] = est.value;
            d["se_ivw"] = est.se_ivw;
            d["se_hksj"] = est.se_hksj;
            d["ci"] = py::make_tuple(est.ci.first, est.ci.second);
            d["df"] = est.df;
            d["level"] = est.level;
            return d;
        },
        py::arg("data"), py::arg("tau2"), py::arg("level") = 0.95);

    py::class_<EdgingtonCD>(m, "EdgingtonCD")
        .def(py::init<const MetaDataset&, double>(), py::arg("data"), py::arg("tau2"),
             py::keep_alive<1, 2>())
        .def_property_readonly("tau2", &EdgingtonCD::tau2)
        .def("cdf", &EdgingtonCD::cdf, py::arg("mu"))
        .def("density", &EdgingtonCD::density, py::arg("mu"))
        .def("quantile", &EdgingtonCD::quantile, py::arg("q"))
        .def("two_sided_p", &EdgingtonCD::two_sided_p, py::arg("mu0"));

    m.def("irwin_hall_cdf", &irwin_hall_cdf, py::arg("s"), py::arg("k"));
    m.def("irwin_hall_pdf", &irwin_hall_pdf, py::arg("s"), py::arg("k"));

    m.def(
        "sample_pcd",
        [](const MetaDataset& data, const std::string& variant, double tau2_hat,
           std::size_t n_draws, std::uint64_t seed, int n_threads) {
            return sample_pcd(data, parse_variant(variant), tau2_hat, n_draws, seed,
                              n_threads)
                .draws;
        },
        py::arg("data"), py::arg("variant"), py::arg("tau2_hat"),
        py::arg("n_draws") = default_draws, py::arg("seed") = 0, py::arg("n_threads") = 0,
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "sample_mu_marginal",
        [](const MetaDataset& data, std::size_t n_draws, std::uint64_t seed,
           int n_threads) {
            return sample_mu_marginal(data, n_draws, seed, n_threads).draws;
        },
        py::arg("data"), py::arg("n_draws") = default_draws, py::arg("seed") = 0,
        py::arg("n_threads") = 0, py::call_guard<py::gil_scoped_release>());

    m.def(
        "equi_tailed_interval",
        [](const std::vector<double>& draws, double level) {
            PredictiveSamples s;
            s.draws = draws;
            return interval_dict(equi_tailed_interval(s, level));
        },
        py::arg("draws"), py::arg("level") = 0.95);

    m.def(
        "hcdp_interval",
        [](const std::vector<double>& draws, double level) {
            PredictiveSamples s;
            s.draws = draws;
            return interval_dict(hcdp_interval(s, level));
        },
        py::arg("draws"), py::arg("level") = 0.95);

    m.def(
        "confidence_probability",
        [](const std::vector<double>& draws, double delta, const std::string& direction) {
            PredictiveSamples s;
            s.draws = draws;
            if (direction == "ge")
                return confidence_probability(s, delta, Direction::GreaterEqual);
            if (direction == "le")
                return confidence_probability(s, delta, Direction::LessEqual);
            throw ValidationError("direction must be 'ge' or 'le'");
        },
        py::arg("draws"), py::arg("delta"), py::arg("direction") = "ge");

    m.def("empirical_quantile", &empirical_quantile, py::arg("values"), py::arg("p"));

    m.def(
        "skipka_predictive",
        [](const MetaDataset& data, double tau2_hat) {
            const ParametricPredictive p = skipka_predictive(data, tau2_hat);
            return py::make_tuple(p.location, p.scale);
        },
        py::arg("data"), py::arg("tau2_hat"));

    m.def(
        "hts_predictive",
        [](const MetaDataset& data, double tau2_hat) {
            const ParametricPredictive p = hts_predictive(data, tau2_hat);
            return py::make_tuple(p.location, p.scale, *p.df);
        },
        py::arg("data"), py::arg("tau2_hat"));

    m.def(
        "wang_ensemble",
        [](const MetaDataset& data, double tau2_hat) {
            return wang_ensemble(data, tau2_hat).draws;
        },
        py::arg("data"), py::arg("tau2_hat"));

    m.def(
        "crps",
        [](const std::vector<double>& draws, double theta0) {
            PredictiveSamples s;
            s.draws = draws;
            return crps_mc(s, theta0);
        },
        py::arg("draws"), py::arg("theta0"));

    m.def(
        "crps_mean",
        [](const std::vector<double>& draws, const std::vector<double>& outcomes) {
            PredictiveSamples s;
            s.draws = draws;
            return crps_mc_mean(s, FutureEffects{outcomes});
        },
        py::arg("draws"), py::arg("outcomes"));

    m.def("crps_normal", &crps_normal_closed, py::arg("mu"), py::arg("sigma"),
          py::arg("y"));

    m.def(
        "fisher_skewness",
        [](const std::vector<double>& values) {
            return fisher_skewness(std::span<const double>(values));
        },
        py::arg("values"));

    m.def("fisher_weighted_skewness", &fisher_weighted_skewness, py::arg("data"),
          py::arg("weighted") = true);

    m.def("interval_skewness", &interval_skewness, py::arg("lower"), py::arg("upper"),
          py::arg("center"));

    m.def("required_iterations", &required_iterations, py::arg("variance_estimate"),
          py::arg("mcse_target"));
}
