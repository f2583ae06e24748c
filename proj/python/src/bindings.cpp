// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "psenh/checkpoint.hpp"
#include "psenh/errors.hpp"
#include "psenh/evaluator.hpp"
#include "psenh/experiment.hpp"
#include "psenh/metrics.hpp"
#include "psenh/mixing.hpp"
#include "psenh/model.hpp"
#include "psenh/report.hpp"
#include "psenh/stft.hpp"
#include "psenh/synthetic.hpp"

namespace py = pybind11;
using namespace psenh;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Signal to_signal(const Array &a) {
  if (a.ndim() != 1) throw ShapeError("expected a 1-D array");
  return Signal(a.data(), a.data() + a.size());
}

Array to_array(const Signal &s) {
  Array out(static_cast<py::ssize_t>(s.size()));
  std::copy(s.begin(), s.end(), out.mutable_data());
  return out;
}

// JSON values cross the boundary as Python objects via the json module.
py::object to_python(const nlohmann::json &j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object &o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

class Enhancer {
 public:
  explicit Enhancer(const std::filesystem::path &checkpoint)
      : ckpt_(load_checkpoint(checkpoint)), model_(ckpt_.instantiate()) {}

  Array enhance(const Array &noisy) const {
    const Signal x = to_signal(noisy);
    Signal y;
    {
      py::gil_scoped_release release;
      y = std::move(model_->forward({&x})[0]);
    }
    return to_array(y);
  }

  std::string architecture() const { return ckpt_.model.name(); }
  std::string scheme() const { return ckpt_.provenance.scheme; }
  py::object provenance() const { return to_python(nlohmann::json(ckpt_.provenance)); }

 private:
  ModelCheckpoint ckpt_;
  std::unique_ptr<EnhancementModel> model_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Personalized speech enhancement: metrics, mixing, models and the experiment pipeline.";

  py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", m.attr("Error"));
  py::register_exception<DataError>(m, "DataError", m.attr("Error"));
  py::register_exception<ShapeError>(m, "ShapeError", m.attr("Error"));
  py::register_exception<ZeroEnergyError>(m, "ZeroEnergyError", m.attr("Error"));
  py::register_exception<DivergenceError>(m, "DivergenceError", m.attr("Error"));

  m.attr("SAMPLE_RATE") = kSampleRate;
  m.attr("SDR_CAP_DB") = kSdrCap;

  m.def("si_sdr", [](const Array &v, const Array &v_hat) {
    const auto r = si_sdr(to_signal(v), to_signal(v_hat));
    return py::make_tuple(r.value_db, r.capped);
  }, py::arg("reference"), py::arg("estimate"), "Scale-invariant SDR in dB and whether it was capped.");
  m.def("sd_sdr", [](const Array &v, const Array &v_hat) {
    const auto r = sd_sdr(to_signal(v), to_signal(v_hat));
    return py::make_tuple(r.value_db, r.capped);
  }, py::arg("reference"), py::arg("estimate"), "Scale-dependent SDR in dB and whether it was capped.");
  m.def("se_loss", [](const Array &v, const Array &v_hat) { return se_loss(to_signal(v), to_signal(v_hat)); },
        py::arg("reference"), py::arg("estimate"));
  m.def("si_sdr_improvement", [](const Array &s, const Array &x, const Array &y) {
    return si_sdr_improvement(to_signal(s), to_signal(x), to_signal(y));
  }, py::arg("clean"), py::arg("noisy"), py::arg("enhanced"));

  m.def("snr_db", [](const Array &t, const Array &n) { return snr_db(to_signal(t), to_signal(n)); },
        py::arg("target"), py::arg("interference"));
  m.def("mix_at_snr", [](const Array &target, const Array &interference, double snr) {
    const auto r = mix_at_snr(AudioClip(to_signal(target)), AudioClip(to_signal(interference)), snr);
    return py::make_tuple(to_array(r.mixture.samples), to_array(r.scaled_interference.samples), r.gain);
  }, py::arg("target"), py::arg("interference"), py::arg("snr_db"),
        "Returns (mixture, scaled interference, gain).");

  m.def("stft_round_trip", [](const Array &x) {
    const Stft stft;
    const Signal s = to_signal(x);
    return to_array(stft.synthesize(stft.analyze(s), s.size()).samples);
  }, py::arg("signal"));

  m.def("read_wav", [](const std::filesystem::path &p) {
    const auto clip = read_wav(p);
    return py::make_tuple(to_array(clip.samples), clip.sample_rate);
  }, py::arg("path"));
  m.def("write_wav", [](const std::filesystem::path &p, const Array &x, int rate) {
    write_wav(p, AudioClip(to_signal(x), rate));
  }, py::arg("path"), py::arg("samples"), py::arg("sample_rate") = kSampleRate);

  m.def("param_count", [](const std::string &name) { return param_count(ModelConfig::from_name(name)); },
        py::arg("architecture"));

  py::class_<Enhancer>(m, "Enhancer", "A trained checkpoint ready to denoise waveforms.")
      .def(py::init<const std::filesystem::path &>(), py::arg("checkpoint"))
      .def("__call__", &Enhancer::enhance, py::arg("noisy"))
      .def_property_readonly("architecture", &Enhancer::architecture)
      .def_property_readonly("scheme", &Enhancer::scheme)
      .def_property_readonly("provenance", &Enhancer::provenance);

  m.def("generate_synthetic_corpus", [](const std::filesystem::path &root, const py::object &config) {
    SyntheticCorpusConfig c;
    if (!config.is_none()) c = from_python(config).get<SyntheticCorpusConfig>();
    py::gil_scoped_release release;
    return generate_synthetic_corpus(root, c);
  }, py::arg("root"), py::arg("config") = py::none());

  m.def("load_config", [](const std::filesystem::path &path, const std::vector<std::string> &overrides) {
    return to_python(nlohmann::json(load_experiment_config(path, overrides)));
  }, py::arg("path"), py::arg("overrides") = std::vector<std::string>{},
        "Resolved experiment config as a dict.");

  m.def("run", [](const py::object &config, const std::string &last_stage) {
    auto cfg = from_python(config).get<ExperimentConfig>();
    validate_experiment_config(cfg);
    const Stage last = parse_stage(last_stage);
    RunSummary s;
    {
      py::gil_scoped_release release;
      s = run_experiment(cfg, last);
    }
    py::dict out;
    out["output_dir"] = s.output_dir;
    out["units_run"] = s.units_run;
    out["units_reused"] = s.units_reused;
    out["grid"] = s.grid ? to_python(nlohmann::json(*s.grid)) : py::none();
    return out;
  }, py::arg("config"), py::arg("last_stage") = "report",
        "Runs the pipeline for a config dict (see load_config).");

  m.def("merge_runs", [](const std::vector<std::filesystem::path> &dirs) {
    return to_python(nlohmann::json(merge_runs(dirs)));
  }, py::arg("run_dirs"));
  m.def("render_table", [](const py::object &grid) { return render_text(from_python(grid).get<Grid>()); },
        py::arg("grid"));
  m.def("format_cell", &format_cell, py::arg("mean"), py::arg("std"));
}
