// Python bindings: bounds, scalar checks, crossing probabilities, chain
// verification and the batch runner. Reports cross the boundary as JSON text
// and are decoded on the Python side.

#include "ncmart/bounds.hpp"
#include "ncmart/errors.hpp"
#include "ncmart/experiment.hpp"
#include "ncmart/generators.hpp"
#include "ncmart/mcsim.hpp"
#include "ncmart/operator.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace ncmart;

namespace {

MgfEnvelope envelope_for(const BoundParams& p, const std::string& kind) {
  if (kind == "khan") return khan_envelope(p.alpha, p.beta, p.gamma);
  if (kind == "saturated") return MgfEnvelope::saturated(p.gamma, p.lambda);
  throw Error(ErrorKind::InvalidParams, "envelope must be 'khan' or 'saturated'");
}

std::string report_text(const BoundReport& r) { return to_json(r).dump(); }

py::dict estimate_dict(const CrossingEstimate& e) {
  py::dict d;
  d["n_paths"] = e.n_paths;
  d["hits"] = e.hits;
  d["p_hat"] = e.p_hat;
  d["ci_low"] = e.ci_low;
  d["ci_high"] = e.ci_high;
  d["horizon"] = e.horizon;
  d["seed"] = e.seed;
  d["a"] = e.a;
  d["b"] = e.b;
  d["m"] = e.m;
  d["i"] = e.i;
  return d;
}

StepDistribution distribution(const std::vector<std::pair<double, double>>& support, double alpha, double beta,
                              double gamma) {
  std::vector<Atom> atoms;
  for (const auto& [v, p] : support) atoms.push_back({v, p});
  return StepDistribution(std::move(atoms), alpha, beta, gamma);
}

}  // namespace

PYBIND11_MODULE(_ncmart, m) {
  m.doc() = "Tail bounds for noncommutative supermartingales";

  // Kept alive for the lifetime of the interpreter; the error carries a `kind` attribute.
  static PyObject* error_type = PyErr_NewException("ncmart._ncmart.NcmartError", PyExc_RuntimeError, nullptr);
  m.attr("NcmartError") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type)(py::str(e.what()));
      exc.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  py::class_<BoundParams>(m, "BoundParams")
      .def(py::init([](double alpha, double beta, double gamma, double lambda_, double a, double b, double c,
                       int m_) {
             BoundParams p;
             p.alpha = alpha;
             p.beta = beta;
             p.gamma = gamma;
             p.lambda = lambda_;
             p.a = a;
             p.b = b;
             p.c = c;
             p.m = m_;
             p.validate();
             return p;
           }),
           py::kw_only(), py::arg("alpha") = 1.0, py::arg("beta") = 1.0, py::arg("gamma") = 0.0,
           py::arg("lambda_") = 0.5, py::arg("a") = 1.0, py::arg("b") = 1.0, py::arg("c") = 1.0, py::arg("m") = 3)
      .def_readwrite("alpha", &BoundParams::alpha)
      .def_readwrite("beta", &BoundParams::beta)
      .def_readwrite("gamma", &BoundParams::gamma)
      .def_readwrite("lambda_", &BoundParams::lambda)
      .def_readwrite("a", &BoundParams::a)
      .def_readwrite("b", &BoundParams::b)
      .def_readwrite("c", &BoundParams::c)
      .def_readwrite("m", &BoundParams::m);

  m.def("lemma_gap", &lemma_gap, py::arg("lambda_"), py::arg("x"));
  m.def("minimal_index", &minimal_index, py::arg("constant"));

  m.def(
      "gt_terms",
      [](const Matrix& y1, const Matrix& y2) {
        const GoldenThompsonTerms t = gt_terms(HermitianOperator(y1), HermitianOperator(y2));
        return std::pair{t.product_trace, t.sum_trace};
      },
      py::arg("y1"), py::arg("y2"), "(tau(e^y1 e^y2), tau(e^(y1 + y2))) for Hermitian y1, y2.");

  m.def(
      "bound",
      [](const std::string& mode, const BoundParams& p, const std::string& envelope) {
        return report_text(bound_for_mode(bound_mode_from_string(mode), p, envelope_for(p, envelope)));
      },
      py::arg("mode"), py::arg("params"), py::arg("envelope") = "khan");
  m.def("azuma_classical_bound", &azuma_classical_bound, py::arg("alpha"), py::arg("c"), py::arg("m"));

  m.def(
      "simulate_crossing",
      [](double alpha, double beta, double gamma, double a, double b, int m_, int i, int horizon,
         std::int64_t n_paths, std::uint64_t seed) {
        CrossingEstimate e;
        {
          py::gil_scoped_release release;
          e = simulate_crossing(StepDistribution::two_point(alpha, beta, gamma), a, b, m_, i, horizon, n_paths, seed);
        }
        return estimate_dict(e);
      },
      py::kw_only(), py::arg("alpha"), py::arg("beta"), py::arg("gamma") = 0.0, py::arg("a"), py::arg("b"),
      py::arg("m"), py::arg("i"), py::arg("horizon"), py::arg("n_paths"), py::arg("seed"),
      "Monte Carlo crossing estimate for the two-point walk.");

  m.def(
      "enumerate_exact",
      [](const std::vector<std::pair<double, double>>& support, double alpha, double beta, double gamma, double a,
         double b, int m_, int i, int horizon) {
        return enumerate_exact(distribution(support, alpha, beta, gamma), a, b, m_, i, horizon);
      },
      py::arg("support"), py::kw_only(), py::arg("alpha"), py::arg("beta"), py::arg("gamma") = 0.0, py::arg("a"),
      py::arg("b"), py::arg("m"), py::arg("i"), py::arg("horizon"),
      "Exact crossing probability for steps given as (value, probability) pairs.");

  m.def(
      "wilson_interval",
      [](std::int64_t hits, std::int64_t n) {
        const WilsonInterval w = wilson_interval(hits, n);
        return std::pair{w.low, w.high};
      },
      py::arg("hits"), py::arg("n"));

  m.def(
      "verify_chain",
      [](const std::string& mode, const BoundParams& p, int steps, const std::string& kind, std::uint64_t seed,
         std::optional<double> rotation, std::optional<int> horizon) {
        const RealVector h = *StepDistribution::two_point(p.alpha, p.beta, p.gamma).as_uniform_diagonal();
        ChainKind chain_kind;
        if (kind == "diagonal") {
          chain_kind = ChainKind::diagonal;
        } else if (kind == "conjugated") {
          chain_kind = ChainKind::conjugated;
        } else {
          throw Error(ErrorKind::InvalidParams, "kind must be 'diagonal' or 'conjugated'");
        }
        Rng rng(seed);
        const AdaptedSequence seq = make_chain(h, steps, chain_kind, rng, rotation);
        const MgfEnvelope env = khan_envelope(p.alpha, p.beta, p.gamma);
        return report_text(verify_inequality(seq, p, env, bound_mode_from_string(mode), horizon.value_or(steps)));
      },
      py::arg("mode"), py::arg("params"), py::kw_only(), py::arg("steps"), py::arg("kind") = "conjugated",
      py::arg("seed") = 0, py::arg("rotation") = py::none(), py::arg("horizon") = py::none(),
      "Builds a two-point chain and compares lattice traces with the bound.");

  m.def(
      "run_experiment",
      [](const std::string& config_text) {
        RunResult r;
        {
          const ExperimentConfig cfg = load_config(nlohmann::json::parse(config_text));
          py::gil_scoped_release release;
          r = run(cfg);
        }
        return py::make_tuple(static_cast<int>(r.exit_code), r.report.dump(), r.csv);
      },
      py::arg("config"), "Runs a batch config given as JSON text; returns (exit_code, report, csv tables).");

  m.attr("REPORT_SCHEMA_VERSION") = kReportSchemaVersion;
}
