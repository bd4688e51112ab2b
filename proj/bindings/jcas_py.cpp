// Python bindings for the main operations: array/channel simulation, the
// detection encodings, set matching, the estimator benchmark, and
// train/validate entry points.
#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "jcas/esprit.hpp"
#include "jcas/experiment.hpp"
#include "jcas/linalg.hpp"
#include "jcas/model.hpp"
#include "jcas/training.hpp"

namespace py = pybind11;
using namespace jcas;

namespace {

CMat cmat_from_array(const py::array_t<cdouble>& arr) {
  const auto buf = arr.request();
  if (buf.ndim != 2) throw std::invalid_argument("expected a 2-D complex array");
  CMat m(static_cast<std::size_t>(buf.shape[0]), static_cast<std::size_t>(buf.shape[1]));
  const auto r = arr.unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      m(i, j) = r(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j));
  return m;
}

py::array_t<cdouble> cmat_to_array(const CMat& m) {
  py::array_t<cdouble> arr({m.rows(), m.cols()});
  auto w = arr.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      w(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) = m(i, j);
  return arr;
}

Mat mat_from_array(const py::array_t<double>& arr) {
  const auto buf = arr.request();
  if (buf.ndim != 2) throw std::invalid_argument("expected a 2-D float array");
  Mat m(static_cast<std::size_t>(buf.shape[0]), static_cast<std::size_t>(buf.shape[1]));
  const auto r = arr.unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      m(i, j) = r(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j));
  return m;
}

py::array_t<double> mat_to_array(const Mat& m) {
  py::array_t<double> arr({m.rows(), m.cols()});
  auto w = arr.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      w(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) = m(i, j);
  return arr;
}

}  // namespace

PYBIND11_MODULE(_jcas, m) {
  m.doc() = "Learned joint communication and sensing workbench (C++ core)";

  py::class_<Rng>(m, "Rng")
      .def(py::init<uint64_t, std::string_view>(), py::arg("seed"), py::arg("stream"))
      .def("uniform", [](Rng& r) { return r.uniform(); })
      .def("normal", &Rng::normal, py::arg("variance") = 1.0)
      .def("cnormal", &Rng::cnormal, py::arg("variance") = 1.0);

  m.def("cnormal_sample",
        [](std::size_t n, double variance, uint64_t seed, const std::string& stream) {
          Rng rng(seed, stream);
          return cnormal_sample(n, variance, rng);
        },
        py::arg("n"), py::arg("variance"), py::arg("seed") = 0,
        py::arg("stream") = "cnormal");

  m.def("steering",
        [](double theta, std::size_t k, double d_over_lambda) {
          return steering(theta, ArrayConfig{k, d_over_lambda});
        },
        py::arg("theta"), py::arg("num_antennas") = 16, py::arg("d_over_lambda") = 0.5);

  m.def("hankel",
        [](const CVec& v, std::size_t l) { return cmat_to_array(hankel(v, l)); },
        py::arg("v"), py::arg("subarray_len"));

  m.def("hermitian_eig", [](const py::array_t<cdouble>& a) {
    const EigResult r = hermitian_eig(cmat_from_array(a));
    return py::make_tuple(r.values, cmat_to_array(r.vectors));
  });

  m.def("lstsq", [](const py::array_t<cdouble>& a, const py::array_t<cdouble>& b) {
    const LstsqResult r = lstsq(cmat_from_array(a), cmat_from_array(b));
    return py::make_tuple(cmat_to_array(r.x), r.cond, r.flagged);
  });

  m.def("counting_encode", &counting_encode, py::arg("count"), py::arg("t_max"));
  m.def("counting_to_onehot",
        [](const std::vector<double>& c) { return counting_to_onehot(c); });
  m.def("onehot_to_counting",
        [](const std::vector<double>& o) { return onehot_to_counting(o); });
  m.def("count_targets", [](const std::vector<double>& p) { return count_targets(p); });

  m.def("pd_pf_counting",
        [](const std::vector<uint32_t>& counts, const py::array_t<double>& est,
           uint32_t t_max, bool sort) {
          const PdPf r = pd_pf_counting(counts, mat_from_array(est), t_max, sort);
          return py::make_tuple(r.pd, r.pf);
        },
        py::arg("counts"), py::arg("estimates"), py::arg("t_max"),
        py::arg("sort_estimates") = true);

  m.def("pd_pf_onehot",
        [](const std::vector<uint32_t>& counts, const py::array_t<double>& est,
           uint32_t t_max) {
          const PdPf r = pd_pf_onehot(counts, mat_from_array(est), t_max);
          return py::make_tuple(r.pd, r.pf);
        });

  m.def("calibrate_offset",
        [](std::vector<double> logits, double pf_target) {
          LogitOffset off;
          if (!calibrate_offset(std::move(logits), pf_target, off))
            throw std::invalid_argument("no zero-labeled logits given");
          return off.value;
        },
        py::arg("zero_labeled_logits"), py::arg("pf_target"));

  m.def("apply_offset", [](const py::array_t<double>& logits, double offset) {
    LogitOffset off{offset, true};
    return mat_to_array(apply_offset(mat_from_array(logits), off));
  });

  m.def("sortinput", [](std::vector<double> t, std::vector<double> e) {
    const AnglePair p = sortinput({std::move(t), std::move(e)});
    return py::make_tuple(p.truth, p.estimate);
  });
  m.def("sortall", [](std::vector<double> t, std::vector<double> e) {
    const AnglePair p = sortall({std::move(t), std::move(e)});
    return py::make_tuple(p.truth, p.estimate);
  });
  m.def("permute_match", [](std::vector<double> t, std::vector<double> e) {
    const AnglePair p = permute_match({std::move(t), std::move(e)});
    return py::make_tuple(p.truth, p.estimate);
  });
  m.def("pair_mse", [](std::vector<double> t, std::vector<double> e) {
    return pair_mse({std::move(t), std::move(e)});
  });

  m.def("sample_covariance",
        [](const py::array_t<cdouble>& z) { return cmat_to_array(sample_covariance(cmat_from_array(z))); });

  m.def("esprit",
        [](const py::array_t<cdouble>& r, std::size_t t, std::size_t k, double dol) {
          return esprit(cmat_from_array(r), t, ArrayConfig{k, dol}).angles;
        },
        py::arg("covariance"), py::arg("num_targets"), py::arg("num_antennas") = 16,
        py::arg("d_over_lambda") = 0.5);

  m.def("esprit_single_snapshot",
        [](const CVec& z, std::size_t t, std::size_t l, double dol) {
          return esprit_single_snapshot(z, t, l, ArrayConfig{z.size(), dol}).angles;
        },
        py::arg("snapshot"), py::arg("num_targets"), py::arg("subarray_len"),
        py::arg("d_over_lambda") = 0.5);

  m.def("esprit_scan",
        [](const py::array_t<cdouble>& z, std::size_t t, double dol) {
          const CMat zm = cmat_from_array(z);
          return esprit_scan(zm, t, ArrayConfig{zm.rows(), dol}).angles;
        },
        py::arg("snapshots"), py::arg("num_targets"), py::arg("d_over_lambda") = 0.5);

  m.def("bmi", [](const py::array_t<double>& llrs, const py::array_t<double>& bits) {
    return bmi(mat_from_array(llrs), mat_from_array(bits));
  });

  m.def("posteriors_to_llrs", [](const std::vector<double>& posterior, uint32_t m_size) {
    return posteriors_to_llrs(posterior, BitLabeling::natural(m_size));
  });

  m.def("train_from_json", [](const std::string& config_json) {
    const ExperimentConfig cfg = config_from_json(config_json);
    return cmd_train(cfg);
  });

  m.def("validate_checkpoint",
        [](const std::string& config_json, const std::filesystem::path& checkpoint) {
          const ExperimentConfig cfg = config_from_json(config_json);
          return cmd_validate(cfg, checkpoint);
        });

  m.def("beam_gain_db",
        [](const CVec& nu, double lo_rad, double hi_rad, std::size_t grid, double dol) {
          return beam_gain_db(nu, AngleRegion{lo_rad, hi_rad}, grid,
                              ArrayConfig{nu.size(), dol});
        },
        py::arg("nu"), py::arg("lo_rad"), py::arg("hi_rad"), py::arg("grid") = 256,
        py::arg("d_over_lambda") = 0.5);

  m.attr("__version__") = "0.1.0";
}
