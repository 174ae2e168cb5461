// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
// Python bindings for the pilotcs core.

#include "pilotcs/commands.hpp"
#include "pilotcs/design_io.hpp"
#include "pilotcs/experiment.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace pilotcs;

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Joint pilot allocation and sequence design for CS-based MIMO-OFDM channel estimation";

    py::register_exception<DegenerateInputError>(m, "DegenerateInputError", PyExc_ValueError);
    py::register_exception<CapacityError>(m, "CapacityError", PyExc_MemoryError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<SystemConfig>(m, "SystemConfig")
        .def(py::init<>())
        .def_readwrite("carrier_freq_hz", &SystemConfig::carrier_freq_hz)
        .def_readwrite("bandwidth_hz", &SystemConfig::bandwidth_hz)
        .def_readwrite("num_subcarriers", &SystemConfig::num_subcarriers)
        .def_readwrite("num_tx", &SystemConfig::num_tx)
        .def_readwrite("num_rx", &SystemConfig::num_rx)
        .def_readwrite("seq_len", &SystemConfig::seq_len)
        .def_readwrite("tx_spacing", &SystemConfig::tx_spacing)
        .def_readwrite("rx_spacing", &SystemConfig::rx_spacing)
        .def_readwrite("total_power", &SystemConfig::total_power)
        .def_readwrite("num_delay_taps", &SystemConfig::num_delay_taps)
        .def("validate", &SystemConfig::validate);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<>())
        .def(py::init([](int t, int p, int d) { return GridSpec{t, p, d}; }), py::arg("g_theta"), py::arg("g_phi"),
             py::arg("g_tau"))
        .def_readwrite("g_theta", &GridSpec::g_theta)
        .def_readwrite("g_phi", &GridSpec::g_phi)
        .def_readwrite("g_tau", &GridSpec::g_tau)
        .def("total", &GridSpec::total);

    py::class_<OptimizerConfig>(m, "OptimizerConfig")
        .def(py::init<>())
        .def_readwrite("p", &OptimizerConfig::p)
        .def_readwrite("q", &OptimizerConfig::q)
        .def_readwrite("lambda_bar", &OptimizerConfig::lambda_bar)
        .def_readwrite("learning_rate", &OptimizerConfig::learning_rate)
        .def_readwrite("iterations", &OptimizerConfig::iterations)
        .def_readwrite("beta1", &OptimizerConfig::beta1)
        .def_readwrite("beta2", &OptimizerConfig::beta2)
        .def_readwrite("eps", &OptimizerConfig::eps)
        .def_readwrite("seed", &OptimizerConfig::seed)
        .def_readwrite("zero_threshold_rel", &OptimizerConfig::zero_threshold_rel)
        .def_readwrite("trace_every", &OptimizerConfig::trace_every);

    py::class_<DictionarySet>(m, "DictionarySet")
        .def_readonly("rx", &DictionarySet::rx)
        .def_readonly("tx", &DictionarySet::tx)
        .def_readonly("delay", &DictionarySet::delay)
        .def_readonly("config", &DictionarySet::config)
        .def_readonly("spec", &DictionarySet::spec)
        .def("num_columns", &DictionarySet::num_columns);

    py::class_<PilotDesign>(m, "PilotDesign")
        .def(py::init<>())
        .def_readwrite("seq_len", &PilotDesign::seq_len)
        .def_readwrite("x", &PilotDesign::x)
        .def_readwrite("allocation", &PilotDesign::allocation)
        .def_readwrite("total_power", &PilotDesign::total_power)
        .def("block_norms", py::overload_cast<>(&PilotDesign::block_norms, py::const_))
        .def("validate", &PilotDesign::validate, py::arg("power_rel_tol") = 1e-10);

    py::class_<CoherenceReport>(m, "CoherenceReport")
        .def_readonly("mutual_coherence", &CoherenceReport::mutual_coherence)
        .def_readonly("generalized_p", &CoherenceReport::generalized_p)
        .def_readonly("welch_bound", &CoherenceReport::welch_bound)
        .def_readonly("n", &CoherenceReport::n)
        .def_readonly("g", &CoherenceReport::g)
        .def_readonly("inner_product_cdf", &CoherenceReport::inner_product_cdf)
        .def_readonly("column_norm_cdf", &CoherenceReport::column_norm_cdf);

    py::class_<TraceRow>(m, "TraceRow")
        .def_readonly("iteration", &TraceRow::iteration)
        .def_readonly("loss", &TraceRow::loss)
        .def_readonly("f_term", &TraceRow::f_term)
        .def_readonly("g_term", &TraceRow::g_term)
        .def_readonly("grad_norm", &TraceRow::grad_norm);

    m.def("steering_vector", &steering_vector, py::arg("angle"), py::arg("n"), py::arg("spacing") = 0.5);
    m.def("build_dictionaries", py::overload_cast<const GridSpec &, const SystemConfig &>(&build_dictionaries));
    m.def("gaussian_pilots", &gaussian_pilots, py::arg("num_tx"), py::arg("seq_len"), py::arg("num_subcarriers"),
          py::arg("seed"));
    m.def("f_omega", py::overload_cast<const PilotDesign &, const DictionarySet &, int>(&f_omega), py::arg("design"),
          py::arg("dicts"), py::arg("p") = 4);
    m.def("block_penalty", &block_penalty, py::arg("x"), py::arg("seq_len"), py::arg("q") = 1.0);
    m.def(
        "loss", [](const Eigen::MatrixXcd &x, const DictionarySet &d, const OptimizerConfig &c) { return loss(x, d, c).loss; },
        py::arg("xbar"), py::arg("dicts"), py::arg("config"));
    m.def("loss_gradient", &loss_gradient, py::arg("xbar"), py::arg("dicts"), py::arg("config"));
    m.def(
        "optimize",
        [](const Eigen::MatrixXcd &x0, const DictionarySet &d, const OptimizerConfig &c) {
            OptimizationResult r;
            {
                py::gil_scoped_release release;
                r = optimize(x0, d, c);
            }
            return py::make_tuple(r.design, r.trace.rows);
        },
        py::arg("xbar0"), py::arg("dicts"), py::arg("config"));
    m.def("coherence_report", &coherence_report, py::arg("design"), py::arg("dicts"), py::arg("p") = 4,
          py::arg("sample_seed") = 0);
    m.def("welch_bound", &welch_bound, py::arg("n"), py::arg("g"));
    m.def("gaussian_random_baseline", &gaussian_random_baseline, py::arg("system"), py::arg("q"), py::arg("seed"));
    m.def("read_design", &read_design);
    m.def("write_design", &write_design);
    m.def("nmse", &nmse);
    m.def("snr_to_sigma2", &snr_to_sigma2, py::arg("total_power"), py::arg("num_tx"), py::arg("seq_len"),
          py::arg("num_pilot_subcarriers"), py::arg("snr_db"));
    m.def(
        "omp_recover",
        [](const PilotDesign &design, const DictionarySet &d, const Eigen::VectorXcd &y, int max_sparsity,
           double residual_tol) {
            const SensingOperator op(design, d, true);
            MeasurementSet ms;
            ms.y = y;
            ms.allocation = design.allocation;
            ms.num_rx = d.config.num_rx;
            ms.seq_len = design.seq_len;
            const SparseEstimate est = omp_solve(ms, op, max_sparsity, residual_tol);
            return py::make_tuple(est.support, est.coefficients, est.residual_norm);
        },
        py::arg("design"), py::arg("dicts"), py::arg("y"), py::arg("max_sparsity"), py::arg("residual_tol") = 0.0);
    m.def(
        "sensing_matrix",
        [](const PilotDesign &design, const DictionarySet &d) { return SensingOperator(design, d, true).dense(); },
        py::arg("design"), py::arg("dicts"));
}
