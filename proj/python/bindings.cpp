// Python bindings for the main operations: constellation construction,
// synthetic channels, model fitting, rate estimation, oracles, and batch IO.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "airkit/data_io.hpp"
#include "airkit/rate_estimators.hpp"

namespace py = pybind11;
using namespace airkit;

namespace {

py::array_t<double> rx_array(const SymbolBatch& b) {
    py::array_t<double> out({static_cast<py::ssize_t>(b.size()), py::ssize_t{4}});
    std::copy(b.rx.begin(), b.rx.end(), out.mutable_data());
    return out;
}

py::array_t<std::uint16_t> tx_array(const SymbolBatch& b) {
    py::array_t<std::uint16_t> out(static_cast<py::ssize_t>(b.size()));
    std::copy(b.tx.begin(), b.tx.end(), out.mutable_data());
    return out;
}

SymbolBatch batch_from_arrays(py::array_t<std::uint16_t, py::array::c_style> tx,
                              py::array_t<double, py::array::c_style> rx,
                              const std::string& scenario, std::uint64_t seed,
                              std::uint32_t batch_id) {
    if (rx.ndim() != 2 || rx.shape(1) != 4)
        throw py::value_error("rx must have shape (n, 4)");
    if (tx.ndim() != 1 || tx.shape(0) != rx.shape(0))
        throw py::value_error("tx must have shape (n,) matching rx");
    SymbolBatch b;
    b.tx.assign(tx.data(), tx.data() + tx.shape(0));
    b.rx.assign(rx.data(), rx.data() + 4 * rx.shape(0));
    b.meta.scenario = scenario;
    b.meta.seed = seed;
    b.meta.batch_id = batch_id;
    return b;
}

FitOptions make_fit_options(const std::optional<std::string>& mean_mode, int min_samples) {
    FitOptions opts;
    if (mean_mode) {
        if (*mean_mode == "static")
            opts.mean_mode_override = MeanMode::Static;
        else if (*mean_mode == "adaptive")
            opts.mean_mode_override = MeanMode::Adaptive;
        else
            throw py::value_error("mean_mode must be 'static' or 'adaptive'");
    }
    opts.min_samples_per_point = min_samples;
    return opts;
}

Estimator parse_estimator(const std::string& name) {
    if (name == "mi" || name == "MI") return Estimator::Mi;
    if (name == "gmi" || name == "GMI") return Estimator::Gmi;
    throw py::value_error("estimator must be 'mi' or 'gmi'");
}

}  // namespace

PYBIND11_MODULE(_airkit, m) {
    m.doc() = "Achievable information rate estimation for PM-QAM symbol streams";

    py::class_<Constellation>(m, "Constellation")
        .def_readonly("name", &Constellation::name)
        .def_property_readonly("points",
                               [](const Constellation& c) {
                                   py::array_t<double> out(
                                       {static_cast<py::ssize_t>(c.size_2d()), py::ssize_t{2}});
                                   auto* p = out.mutable_data();
                                   for (const auto& pt : c.points) {
                                       *p++ = pt[0];
                                       *p++ = pt[1];
                                   }
                                   return out;
                               })
        .def_property_readonly("labels",
                               [](const Constellation& c) {
                                   std::vector<std::string> out;
                                   for (int j = 0; j < c.size_2d(); ++j)
                                       out.push_back(c.label_string(j));
                                   return out;
                               })
        .def_property_readonly("size_2d", &Constellation::size_2d)
        .def_property_readonly("size_4d", &Constellation::size_4d)
        .def_property_readonly("bits_per_4d", &Constellation::bits_per_4d)
        .def("average_energy_2d", &Constellation::average_energy_2d)
        .def("bits_of", [](const Constellation& c, int idx) { return bits_of(c, idx); },
             py::arg("symbol_index_4d"))
        .def("export_text", [](const Constellation& c) { return export_text(c); })
        .def("__repr__", [](const Constellation& c) {
            return "<Constellation " + c.name + ">";
        });

    m.def("build_qam", &build_qam, py::arg("order"),
          "Unit-energy square QAM with per-axis Gray labels");
    m.def("constellation_from_name", &constellation_from_name, py::arg("name"));

    py::class_<SymbolBatch>(m, "SymbolBatch")
        .def(py::init(&batch_from_arrays), py::arg("tx"), py::arg("rx"),
             py::arg("scenario") = "", py::arg("seed") = 0, py::arg("batch_id") = 0)
        .def_property_readonly("tx", &tx_array)
        .def_property_readonly("rx", &rx_array)
        .def_property_readonly("scenario",
                               [](const SymbolBatch& b) { return b.meta.scenario; })
        .def_property_readonly("seed", [](const SymbolBatch& b) { return b.meta.seed; })
        .def_property_readonly("batch_id",
                               [](const SymbolBatch& b) { return b.meta.batch_id; })
        .def_property_readonly("split", [](const SymbolBatch& b) { return b.meta.split; })
        .def("__len__", &SymbolBatch::size)
        .def("__repr__", [](const SymbolBatch& b) {
            return "<SymbolBatch n=" + std::to_string(b.size()) + " scenario='" +
                   b.meta.scenario + "'>";
        });

    m.def(
        "simulate",
        [](const Constellation& c, const std::string& scenario, std::uint32_t batch_id) {
            return simulate(c, ChannelScenario::parse(scenario), batch_id);
        },
        py::arg("constellation"), py::arg("scenario"), py::arg("batch_id") = 0,
        "Generate one batch from a scenario string, e.g. 'awgn snr=12 n=200000 seed=7'");

    m.def(
        "split_batch",
        [](const SymbolBatch& b, double ratio, std::uint64_t seed) {
            TrainEvalSplit s = split_batch(b, ratio, seed);
            return py::make_tuple(std::move(s.train), std::move(s.eval));
        },
        py::arg("batch"), py::arg("ratio") = 0.5, py::arg("seed") = 17);

    py::class_<AuxChannelModel>(m, "AuxChannelModel")
        .def_property_readonly("kind", [](const AuxChannelModel& m_) { return m_.kind().name(); })
        .def_property_readonly("mean_mode",
                               [](const AuxChannelModel& m_) { return to_string(m_.mean_mode()); })
        .def_property_readonly("d", &AuxChannelModel::d)
        .def_property_readonly("n_sub", &AuxChannelModel::n_sub)
        .def_property_readonly("points_per_sub", &AuxChannelModel::points_per_sub)
        .def_property_readonly("epsilon", &AuxChannelModel::epsilon)
        .def_property_readonly("dof",
                               [](const AuxChannelModel& m_) {
                                   return dof_4d(m_.kind(), m_.constellation());
                               })
        .def("means",
             [](const AuxChannelModel& m_, int sub) {
                 py::array_t<double> out({static_cast<py::ssize_t>(m_.points_per_sub()),
                                          static_cast<py::ssize_t>(m_.d())});
                 auto* p = out.mutable_data();
                 for (int j = 0; j < m_.points_per_sub(); ++j)
                     for (double v : m_.mean(sub, j)) *p++ = v;
                 return out;
             },
             py::arg("sub") = 0)
        .def("covariance",
             [](const AuxChannelModel& m_, int sub, int point) {
                 const auto cov = m_.covariance(sub, point);
                 py::array_t<double> out(
                     {static_cast<py::ssize_t>(m_.d()), static_cast<py::ssize_t>(m_.d())});
                 std::copy(cov.begin(), cov.end(), out.mutable_data());
                 return out;
             },
             py::arg("sub"), py::arg("point"))
        .def("logpdf",
             [](const AuxChannelModel& m_, int point, std::vector<double> y, int sub) {
                 return m_.logpdf(sub, point, y);
             },
             py::arg("point"), py::arg("y"), py::arg("sub") = 0)
        .def("log_output_density",
             [](const AuxChannelModel& m_, std::vector<double> y, int sub) {
                 return m_.log_output_density(sub, y);
             },
             py::arg("y"), py::arg("sub") = 0)
        .def("__repr__", [](const AuxChannelModel& m_) {
            return "<AuxChannelModel " + m_.kind().name() + ">";
        });

    m.def(
        "fit",
        [](const std::string& kind, const Constellation& c, const SymbolBatch& train,
           const std::optional<std::string>& mean_mode, int min_samples) {
            return fit(ModelKind::parse(kind), c, train,
                       make_fit_options(mean_mode, min_samples));
        },
        py::arg("kind"), py::arg("constellation"), py::arg("train"),
        py::arg("mean_mode") = std::nullopt, py::arg("min_samples") = 0);

    m.def("dof_report", [](const Constellation& c) { return dof_report(c); },
          py::arg("constellation"));

    py::class_<RateEstimate>(m, "RateEstimate")
        .def_readonly("rate_bit_per_4d", &RateEstimate::rate_bit_per_4d)
        .def_readonly("per_batch_rates", &RateEstimate::per_batch_rates)
        .def_readonly("per_subchannel_rates", &RateEstimate::per_subchannel_rates)
        .def_readonly("stderr", &RateEstimate::stderr_rate)
        .def_readonly("negative", &RateEstimate::negative)
        .def_property_readonly("estimator",
                               [](const RateEstimate& e) { return to_string(e.estimator); })
        .def_property_readonly("model", [](const RateEstimate& e) { return e.kind.name(); })
        .def_property_readonly("mean_mode",
                               [](const RateEstimate& e) { return to_string(e.mean_mode_used); })
        .def("__repr__", [](const RateEstimate& e) {
            return "<RateEstimate " + to_string(e.estimator) + " " + e.kind.name() + " " +
                   std::to_string(e.rate_bit_per_4d) + " bit/4D>";
        });

    m.def(
        "mi_rate",
        [](const SymbolBatch& eval, const AuxChannelModel& model, bool allow_overlap) {
            return mi_rate(eval, model, allow_overlap);
        },
        py::arg("eval"), py::arg("model"), py::arg("allow_overlap") = false);

    m.def(
        "gmi_rate",
        [](const SymbolBatch& eval, const AuxChannelModel& model, const Constellation& c,
           bool allow_overlap) { return gmi_rate(eval, model, c, allow_overlap); },
        py::arg("eval"), py::arg("model"), py::arg("constellation"),
        py::arg("allow_overlap") = false);

    m.def(
        "compute_llrs",
        [](std::vector<double> y, const AuxChannelModel& model, const Constellation& c) {
            const auto llrs = compute_llrs(y, model, c);
            py::array_t<double> out(static_cast<py::ssize_t>(llrs.size()));
            std::copy(llrs.begin(), llrs.end(), out.mutable_data());
            return out;
        },
        py::arg("y"), py::arg("model"), py::arg("constellation"));

    m.def(
        "double_monte_carlo",
        [](const std::vector<SymbolBatch>& batches, const std::string& kind,
           const std::string& estimator, const Constellation& c, double split_ratio,
           std::uint64_t split_seed, bool train_equals_eval,
           const std::optional<std::string>& mean_mode, int min_samples) {
            EstimateOptions opts;
            opts.split_ratio = split_ratio;
            opts.split_seed = split_seed;
            opts.train_equals_eval = train_equals_eval;
            opts.fit = make_fit_options(mean_mode, min_samples);
            return double_monte_carlo(batches, ModelKind::parse(kind),
                                      parse_estimator(estimator), c, opts);
        },
        py::arg("batches"), py::arg("kind"), py::arg("estimator"), py::arg("constellation"),
        py::arg("split_ratio") = 0.5, py::arg("split_seed") = 17,
        py::arg("train_equals_eval") = false, py::arg("mean_mode") = std::nullopt,
        py::arg("min_samples") = 0);

    m.def(
        "true_rate_oracle",
        [](const Constellation& c, const std::string& scenario, const std::string& quantity,
           int quad_nodes) {
            OracleOptions opts;
            opts.quad_nodes = quad_nodes;
            return true_rate_oracle(c, ChannelScenario::parse(scenario),
                                    quantity == "gmi" ? OracleQuantity::Gmi
                                                      : OracleQuantity::Mi,
                                    opts);
        },
        py::arg("constellation"), py::arg("scenario"), py::arg("quantity") = "mi",
        py::arg("quad_nodes") = 96);

    m.def(
        "mc_rate_oracle",
        [](const Constellation& c, const std::string& scenario, std::uint64_t n,
           std::uint64_t seed) {
            double se = 0.0;
            const double rate = mc_rate_oracle(c, ChannelScenario::parse(scenario), n, seed, &se);
            return py::make_tuple(rate, se);
        },
        py::arg("constellation"), py::arg("scenario"), py::arg("n") = 1000000,
        py::arg("seed") = 0xC0FFEE);

    m.def(
        "write_batch",
        [](const SymbolBatch& b, const Constellation& c, const std::string& path) {
            write_batch(b, c, path);
        },
        py::arg("batch"), py::arg("constellation"), py::arg("path"));
    m.def(
        "read_batch",
        [](const std::string& path) {
            LoadedBatch loaded = read_batch(path);
            return py::make_tuple(std::move(loaded.batch), std::move(loaded.constellation));
        },
        py::arg("path"));

    m.def(
        "write_model",
        [](const AuxChannelModel& model, const std::string& path) { write_model(model, path); },
        py::arg("model"), py::arg("path"));
    m.def("read_model", [](const std::string& path) { return read_model(path); },
          py::arg("path"));
}
