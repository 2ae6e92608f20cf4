#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ngrc/basin.hpp"
#include "ngrc/errors.hpp"
#include "ngrc/experiment.hpp"
#include "ngrc/features.hpp"
#include "ngrc/io.hpp"

namespace py = pybind11;
using namespace ngrc;

namespace {

using Rows = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<State> to_states(const Rows& a) {
  if (a.ndim() != 2 || a.shape(1) != kStateDim) {
    throw py::value_error("expected an array of shape (n, 4)");
  }
  const auto r = a.unchecked<2>();
  std::vector<State> out(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    out[static_cast<std::size_t>(i)] = State(r(i, 0), r(i, 1), r(i, 2), r(i, 3));
  }
  return out;
}

State to_state(const Rows& a) {
  if (a.size() != kStateDim) throw py::value_error("expected 4 state components");
  const double* p = a.data();
  return {p[0], p[1], p[2], p[3]};
}

py::array_t<double> from_states(std::span<const State> s) {
  py::array_t<double> out({static_cast<py::ssize_t>(s.size()), py::ssize_t{kStateDim}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (int c = 0; c < kStateDim; ++c) w(static_cast<py::ssize_t>(i), c) = s[i][c];
  }
  return out;
}

py::array_t<double> from_state(const State& s) { return py::array_t<double>(4, s.data()); }

py::array_t<double> from_array(const std::array<double, 4>& a) {
  return py::array_t<double>(4, a.data());
}

BasinRegion make_region(const std::string& axis1, const std::string& axis2,
                        const std::optional<Rows>& base,
                        std::pair<double, double> range1, std::pair<double, double> range2,
                        std::pair<std::size_t, std::size_t> resolution) {
  BasinRegion r;
  r.axis1 = parse_axis(axis1);
  r.axis2 = parse_axis(axis2);
  r.base = base ? to_state(*base) : State::Zero();
  std::tie(r.lo1, r.hi1) = range1;
  std::tie(r.lo2, r.hi2) = range2;
  std::tie(r.n1, r.n2) = resolution;
  r.validate();
  return r;
}

py::array_t<std::uint8_t> label_codes(const BasinGrid& g) {
  py::array_t<std::uint8_t> out(
      {static_cast<py::ssize_t>(g.region.n1), static_cast<py::ssize_t>(g.region.n2)});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < g.region.n1; ++i) {
    for (std::size_t j = 0; j < g.region.n2; ++j) {
      w(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) =
          static_cast<std::uint8_t>(g.at(i, j));
    }
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_ngrc, m) {
  m.doc() = "Next-generation reservoir computing for the Li-Sprott system";

  auto base_error = py::register_exception<Error>(m, "NgrcError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base_error.ptr());
  py::register_exception<NonFiniteState>(m, "NonFiniteState", base_error.ptr());
  py::register_exception<FormatError>(m, "FormatError", base_error.ptr());

  m.attr("STATE_DIM") = kStateDim;
  m.attr("LABELS") = py::make_tuple("torus", "chaos_neg", "chaos_pos");

  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init([](double dt, double t0, const Rows& samples) {
             return Trajectory(dt, t0, to_states(samples));
           }),
           py::arg("dt"), py::arg("t0"), py::arg("samples"))
      .def_property_readonly("dt", &Trajectory::dt)
      .def_property_readonly("t0", &Trajectory::t0)
      .def_property_readonly("samples", [](const Trajectory& t) { return from_states(t.samples()); })
      .def_property_readonly("times",
                             [](const Trajectory& t) {
                               py::array_t<double> out(static_cast<py::ssize_t>(t.size()));
                               auto w = out.mutable_unchecked<1>();
                               for (std::size_t i = 0; i < t.size(); ++i) {
                                 w(static_cast<py::ssize_t>(i)) = t.time(i);
                               }
                               return out;
                             })
      .def("mirrored", &Trajectory::mirrored)
      .def("slice", &Trajectory::slice, py::arg("first"), py::arg("count"))
      .def("is_valid", [](const Trajectory& t) { return resample_check(t); })
      .def("__len__", &Trajectory::size)
      .def("__eq__", [](const Trajectory& a, const Trajectory& b) { return a == b; });

  m.def(
      "vector_field",
      [](const Rows& s, double a, double b) {
        return from_state(vector_field(to_state(s), SystemParams{a, b}));
      },
      py::arg("state"), py::arg("a") = 6.0, py::arg("b") = 0.1);
  m.def(
      "symmetry_map", [](const Rows& s) { return from_state(symmetry_map(to_state(s))); },
      py::arg("state"));
  m.def(
      "integrate",
      [](const Rows& s0, double t_span, double dt, double a, double b, double abs_tol) {
        const State s = to_state(s0);
        const SystemParams p{a, b};
        p.validate();
        py::gil_scoped_release release;
        return integrate(s, p, t_span, dt, {.abs_tol = abs_tol});
      },
      py::arg("s0"), py::arg("t_span"), py::arg("dt") = 0.05, py::arg("a") = 6.0,
      py::arg("b") = 0.1, py::arg("abs_tol") = 1e-7);

  m.def("feature_dim", &feature_dim, py::arg("d"), py::arg("k"));
  m.def(
      "quadratic_features",
      [](const Eigen::VectorXd& lin) -> Eigen::VectorXd { return quadratic_features(lin); },
      py::arg("lin"));

  py::class_<NgrcModel>(m, "NgrcModel")
      .def_property_readonly("k", &NgrcModel::taps)
      .def_property_readonly("dt", [](const NgrcModel& mo) { return mo.config().dt; })
      .def_property_readonly("alpha", [](const NgrcModel& mo) { return mo.config().alpha; })
      .def_property_readonly("constant_term",
                             [](const NgrcModel& mo) { return mo.config().constant_term; })
      .def_property_readonly("w_out", [](const NgrcModel& mo) -> Eigen::MatrixXd { return mo.w_out(); })
      .def_property_readonly("feature_dim", &NgrcModel::feature_dim)
      .def_property_readonly("weight_count", &NgrcModel::weight_count)
      .def("hash", [](const NgrcModel& mo) { return io::model_hash(mo); })
      .def("to_json", [](const NgrcModel& mo) { return io::model_to_json(mo).dump(); });

  m.def(
      "train",
      [](const Trajectory& data, std::size_t k, double alpha, double constant_term) {
        NgrcConfig c;
        c.k = k;
        c.dt = data.dt();
        c.alpha = alpha;
        c.constant_term = constant_term;
        return train(data, c);
      },
      py::arg("data"), py::arg("k") = 2, py::arg("alpha") = 4e-5, py::arg("constant_term") = 1.0);
  m.def("training_nrmse", &training_nrmse, py::arg("model"), py::arg("data"));
  m.def(
      "forecast",
      [](const NgrcModel& model, const Rows& warmup, std::size_t n_steps, double t_start) {
        const auto w = to_states(warmup);
        py::gil_scoped_release release;
        return forecast(model, w, n_steps, t_start);
      },
      py::arg("model"), py::arg("warmup"), py::arg("n_steps"), py::arg("t_start") = 0.0);
  m.def(
      "bootstrap_warmup",
      [](const std::vector<NgrcModel>& ladder, const Rows& ic) {
        const auto w = bootstrap_warmup(ladder, to_state(ic));
        return from_states(w);
      },
      py::arg("ladder"), py::arg("ic"));
  m.def("nrmse", &nrmse, py::arg("pred"), py::arg("truth"));

  m.def(
      "stats",
      [](const Trajectory& t) {
        const AttractorStats s = stats(t);
        py::dict d;
        d["mean"] = from_array(s.mean);
        d["mean_abs"] = from_array(s.mean_abs);
        d["duration"] = s.duration;
        return d;
      },
      py::arg("traj"));
  m.def(
      "delta_pair",
      [](const Trajectory& f, const Trajectory& t) {
        const AttractorDeltas d = delta_pair(stats(f), stats(t));
        return py::make_tuple(from_array(d.center), from_array(d.extent), delta_att(d));
      },
      py::arg("forecast"), py::arg("truth"),
      "(delta_v, delta_abs_v, delta_att) between the time averages of two trajectories");
  m.def(
      "delta_tot",
      [](double t, double cn, double cp) { return delta_tot(std::array<double, 3>{t, cn, cp}); },
      py::arg("torus"), py::arg("chaos_neg"), py::arg("chaos_pos"));
  m.def(
      "valid_time",
      [](const Trajectory& p, const Trajectory& t, double thr) { return valid_time(p, t, thr); },
      py::arg("pred"), py::arg("truth"), py::arg("threshold") = kDefaultValidThreshold);

  m.def(
      "classify", [](double u) { return std::string(to_string(classify(u))); }, py::arg("u"));
  m.def(
      "compute_basin",
      [](const std::string& engine, std::optional<NgrcModel> model,
         std::vector<NgrcModel> ladder, const std::string& axis1, const std::string& axis2,
         const std::optional<Rows>& base, std::pair<double, double> range1, std::pair<double, double> range2,
         std::pair<std::size_t, std::size_t> resolution, double horizon, unsigned workers,
         double a, double b) {
        const BasinRegion region = make_region(axis1, axis2, base, range1, range2, resolution);
        const SystemParams p{a, b};
        p.validate();
        std::optional<BasinEngine> e;
        switch (parse_engine(engine)) {
          case EngineKind::oracle:
            e = BasinEngine::oracle(p);
            break;
          case EngineKind::ngrc_oracle_warmup:
            if (!model) throw py::value_error("engine needs a model");
            e = BasinEngine::ngrc_oracle_warmup(*model, p);
            break;
          case EngineKind::ngrc_bootstrap:
            if (!model) throw py::value_error("engine needs a model");
            ladder.push_back(*model);
            e = BasinEngine::ngrc_bootstrap(std::move(ladder));
            break;
        }
        BasinGrid g;
        {
          py::gil_scoped_release release;
          g = compute_basin(region, *e, horizon, workers);
        }
        return py::make_tuple(label_codes(g), g.divergence_count);
      },
      py::arg("engine"), py::arg("model") = py::none(), py::arg("ladder") = std::vector<NgrcModel>{},
      py::arg("axis1") = "y0", py::arg("axis2") = "u0",
      py::arg("base") = py::none(),
      py::arg("range1") = std::pair<double, double>{0.0, 10.0},
      py::arg("range2") = std::pair<double, double>{-2.0, 2.0},
      py::arg("resolution") = std::pair<std::size_t, std::size_t>{100, 100},
      py::arg("horizon") = kDefaultHorizon, py::arg("workers") = 0u, py::arg("a") = 6.0,
      py::arg("b") = 0.1,
      "Label codes (n1 x n2, indices into LABELS) and the divergence count");

  m.def("save_model", &io::save_model, py::arg("path"), py::arg("model"));
  m.def("load_model", &io::load_model, py::arg("path"));
  m.def(
      "read_trajectory_csv",
      [](const std::filesystem::path& p) { return io::read_trajectory_csv(p); }, py::arg("path"));
  m.def(
      "write_trajectory_csv",
      [](const std::filesystem::path& p, const Trajectory& t) { io::write_trajectory_csv(p, t); },
      py::arg("path"), py::arg("traj"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"ngrc"};
        for (const auto& a : args) argv.push_back(a.c_str());
        py::gil_scoped_release release;
        return cli::run(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Runs the ngrc command line and returns its exit code");
}
