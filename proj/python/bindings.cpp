#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <optional>

#include "camfse/camfse.hpp"

namespace py = pybind11;
using namespace camfse;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<std::uint8_t> stack_planes(const VideoSequence& seq, Component c) {
  const int w = c == Component::luma ? seq.width() : seq.width() / 2;
  const int h = c == Component::luma ? seq.height() : seq.height() / 2;
  py::array_t<std::uint8_t> out({seq.frame_count(), h, w});
  auto* dst = out.mutable_data();
  const auto plane_bytes = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  for (int t = 0; t < seq.frame_count(); ++t) {
    const Plane& p = plane_of(seq.frame(t), c);
    if (p.empty())
      std::memset(dst + t * plane_bytes, 128, plane_bytes);
    else
      std::memcpy(dst + t * plane_bytes, p.data().data(), plane_bytes);
  }
  return out;
}

VideoSequence sequence_from_arrays(const U8Array& luma, const std::optional<U8Array>& cb,
                                   const std::optional<U8Array>& cr) {
  if (luma.ndim() != 3) throw DataError("luma must be a (frames, height, width) array");
  if (cb.has_value() != cr.has_value()) throw DataError("give both chroma planes or neither");
  const int frames = static_cast<int>(luma.shape(0));
  const int h = static_cast<int>(luma.shape(1));
  const int w = static_cast<int>(luma.shape(2));
  if (cb && (cb->ndim() != 3 || cb->shape(0) != frames || cb->shape(1) != h / 2 ||
             cb->shape(2) != w / 2 || cr->ndim() != 3 || cr->shape(0) != frames ||
             cr->shape(1) != h / 2 || cr->shape(2) != w / 2))
    throw DataError("chroma arrays must be (frames, height/2, width/2)");

  VideoSequence seq(w, h);
  const auto luma_bytes = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const auto chroma_bytes = luma_bytes / 4;
  for (int t = 0; t < frames; ++t) {
    Frame f;
    f.luma = Plane(w, h);
    std::memcpy(f.luma.data().data(), luma.data() + t * luma_bytes, luma_bytes);
    if (cb) {
      f.cb = Plane(w / 2, h / 2);
      f.cr = Plane(w / 2, h / 2);
      std::memcpy(f.cb.data().data(), cb->data() + t * chroma_bytes, chroma_bytes);
      std::memcpy(f.cr.data().data(), cr->data() + t * chroma_bytes, chroma_bytes);
    }
    seq.push_back(std::move(f));
  }
  return seq;
}

// Model of a (P, N, M) volume: samples with positive weight are support, the
// rest are to be extrapolated.
py::array_t<double> extrapolate(const F64Array& samples, const F64Array& weights,
                                int center_layer, const FseConfig& cfg) {
  if (samples.ndim() != 3 || weights.ndim() != 3)
    throw DataError("samples and weights must be (P, N, M) arrays");
  for (int d = 0; d < 3; ++d)
    if (samples.shape(d) != weights.shape(d)) throw DataError("samples and weights differ in shape");
  const int P = static_cast<int>(samples.shape(0));
  const int N = static_cast<int>(samples.shape(1));
  const int M = static_cast<int>(samples.shape(2));
  if (center_layer < 0 || center_layer >= P) throw ConfigError("center_layer out of range");

  ExtrapolationVolume vol(M, N, P, center_layer);
  WeightVolume w;
  w.M = M;
  w.N = N;
  w.P = P;
  w.weights.assign(vol.size(), 0.0);
  w.layer_factors.assign(static_cast<std::size_t>(P), 1.0);
  for (std::size_t i = 0; i < vol.size(); ++i) {
    const double wi = weights.data()[i];
    if (wi < 0.0) throw DataError("weights must be non-negative");
    vol.samples[i] = samples.data()[i];
    vol.status[i] = wi > 0.0 ? SampleStatus::support : SampleStatus::loss;
    w.weights[i] = wi;
  }

  SpectralModel model;
  {
    py::gil_scoped_release release;
    model = generate_model_fast(vol, w, cfg);
  }
  const auto full = render_complex(model, M, N, P);
  py::array_t<double> out({P, N, M});
  for (std::size_t i = 0; i < full.size(); ++i) out.mutable_data()[i] = full[i].real();
  return out;
}

}  // namespace

PYBIND11_MODULE(_camfse, m) {
  m.doc() = "Motion-compensated frequency selective extrapolation for video error concealment";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<EmptyRingError>(m, "EmptyRingError", base.ptr());
  py::register_exception<NoSupportError>(m, "NoSupportError", base.ptr());
  py::register_exception<DegenerateFitError>(m, "DegenerateFitError", base.ptr());

  py::class_<VideoSequence>(m, "VideoSequence")
      .def(py::init(&sequence_from_arrays), py::arg("luma"), py::arg("cb") = py::none(),
           py::arg("cr") = py::none())
      .def_property_readonly("width", &VideoSequence::width)
      .def_property_readonly("height", &VideoSequence::height)
      .def_property_readonly("frame_count", &VideoSequence::frame_count)
      .def("luma", [](const VideoSequence& s) { return stack_planes(s, Component::luma); })
      .def("cb", [](const VideoSequence& s) { return stack_planes(s, Component::cb); })
      .def("cr", [](const VideoSequence& s) { return stack_planes(s, Component::cr); })
      .def("__eq__", [](const VideoSequence& a, const VideoSequence& b) { return a == b; });

  m.def("load_sequence", &load_sequence, py::arg("path"), py::arg("width"), py::arg("height"),
        py::arg("max_frames") = std::numeric_limits<int>::max());
  m.def("save_sequence", &save_sequence, py::arg("sequence"), py::arg("path"));

  py::class_<MaskGeometry>(m, "MaskGeometry")
      .def(py::init([](int w, int h, int frames, int bs) { return MaskGeometry{w, h, frames, bs}; }),
           py::arg("width"), py::arg("height"), py::arg("frame_count"),
           py::arg("block_size") = kDefaultBlockSize)
      .def_static("of", &MaskGeometry::of, py::arg("sequence"),
                  py::arg("block_size") = kDefaultBlockSize)
      .def_readwrite("width", &MaskGeometry::width)
      .def_readwrite("height", &MaskGeometry::height)
      .def_readwrite("frame_count", &MaskGeometry::frame_count)
      .def_readwrite("block_size", &MaskGeometry::block_size);

  py::enum_<BlockState>(m, "BlockState")
      .value("intact", BlockState::intact)
      .value("lost", BlockState::lost)
      .value("concealed", BlockState::concealed);

  py::class_<LossMask>(m, "LossMask")
      .def(py::init<const MaskGeometry&>(), py::arg("geometry"))
      .def_property_readonly("blocks_x", &LossMask::blocks_x)
      .def_property_readonly("blocks_y", &LossMask::blocks_y)
      .def_property_readonly("frame_count", &LossMask::frame_count)
      .def_property_readonly("block_size", &LossMask::block_size)
      .def("state", [](const LossMask& mk, int t, int bx, int by) { return mk.state(t, {bx, by}); })
      .def("mark_lost", [](LossMask& mk, int t, int bx, int by) { mk.mark_lost(t, {bx, by}); })
      .def("lost_count", py::overload_cast<>(&LossMask::lost_count, py::const_))
      .def("damaged_count", &LossMask::damaged_count)
      .def("__eq__", [](const LossMask& a, const LossMask& b) { return a == b; });

  m.def("checkerboard_mask",
        [](const std::vector<int>& frames, int parity, const MaskGeometry& g) {
          return checkerboard_mask(frames, parity, g);
        },
        py::arg("frames"), py::arg("parity"), py::arg("geometry"));
  m.def("slice_mask",
        [](const std::vector<int>& frames, int phase, const MaskGeometry& g) {
          return slice_mask(frames, phase, g);
        },
        py::arg("frames"), py::arg("phase"), py::arg("geometry"));
  m.def("apply_loss",
        [](const VideoSequence& s, const LossMask& mk, std::uint8_t fill, bool chroma) {
          return apply_loss(s, mk, fill, chroma ? LossPlanes::all : LossPlanes::luma);
        },
        py::arg("sequence"), py::arg("mask"), py::arg("fill") = 0, py::arg("chroma") = false);
  m.def("parse_frame_list", &parse_frame_list, py::arg("text"));
  m.def("write_mask",
        py::overload_cast<const LossMask&, const std::filesystem::path&>(&write_mask),
        py::arg("mask"), py::arg("path"));
  m.def("read_mask",
        py::overload_cast<const std::filesystem::path&, const MaskGeometry&>(&read_mask),
        py::arg("path"), py::arg("geometry"));

  py::class_<MotionEstimate>(m, "MotionEstimate")
      .def_readonly("kappa", &MotionEstimate::kappa)
      .def_property_readonly("vector",
                             [](const MotionEstimate& e) { return py::make_tuple(e.vector.dx, e.vector.dy); })
      .def_readonly("error", &MotionEstimate::error)
      .def_readonly("reliable", &MotionEstimate::reliable);

  m.def("estimate_motion",
        [](const VideoSequence& s, const LossMask& mk, int frame, int bx, int by, int kappa,
           int d_max, int ring_width) {
          return estimate_motion(s, mk, frame, {bx, by}, kappa, d_max, ring_width);
        },
        py::arg("sequence"), py::arg("mask"), py::arg("frame"), py::arg("bx"), py::arg("by"),
        py::arg("kappa"), py::arg("d_max") = 16, py::arg("ring_width") = 4);
  m.def("omega", &omega, py::arg("error"), py::arg("omega_max") = 0.675,
        py::arg("t_e") = 84.375);

  py::class_<TransformDims>(m, "TransformDims")
      .def(py::init([](int mm, int n, int p) { return TransformDims{mm, n, p}; }), py::arg("m") = 64,
           py::arg("n") = 64, py::arg("p") = 16)
      .def_readwrite("m", &TransformDims::m)
      .def_readwrite("n", &TransformDims::n)
      .def_readwrite("p", &TransformDims::p);

  py::class_<FseConfig>(m, "FseConfig")
      .def(py::init<>())
      .def_readwrite("iterations", &FseConfig::iterations)
      .def_readwrite("gamma", &FseConfig::gamma)
      .def_readwrite("dims", &FseConfig::dims)
      .def_readwrite("rho_hat", &FseConfig::rho_hat);

  m.def("extrapolate", &extrapolate, py::arg("samples"), py::arg("weights"),
        py::arg("center_layer"), py::arg("config") = FseConfig{});

  py::enum_<Mode>(m, "Mode")
      .value("content_adaptive", Mode::content_adaptive)
      .value("fixed_weighting", Mode::fixed_weighting)
      .value("temporal_copy", Mode::temporal_copy);
  m.def("parse_mode", &parse_mode, py::arg("name"));

  py::class_<ConcealConfig>(m, "ConcealConfig")
      .def(py::init<>())
      .def_readwrite("n_prev", &ConcealConfig::n_prev)
      .def_readwrite("n_follow", &ConcealConfig::n_follow)
      .def_readwrite("d_max", &ConcealConfig::d_max)
      .def_readwrite("ring_width", &ConcealConfig::ring_width)
      .def_readwrite("block_size", &ConcealConfig::block_size)
      .def_readwrite("border", &ConcealConfig::border)
      .def_readwrite("t_abs", &ConcealConfig::t_abs)
      .def_readwrite("t_rel", &ConcealConfig::t_rel)
      .def_readwrite("omega_max", &ConcealConfig::omega_max)
      .def_readwrite("t_e", &ConcealConfig::t_e)
      .def_readwrite("delta", &ConcealConfig::delta)
      .def_readwrite("mode", &ConcealConfig::mode)
      .def_readwrite("fse", &ConcealConfig::fse)
      .def_readwrite("threads", &ConcealConfig::threads)
      .def_readwrite("conceal_chroma", &ConcealConfig::conceal_chroma)
      .def("validate", &ConcealConfig::validate);

  py::class_<LayerReport>(m, "LayerReport")
      .def_readonly("kappa", &LayerReport::kappa)
      .def_property_readonly("vector",
                             [](const LayerReport& l) { return py::make_tuple(l.vector.dx, l.vector.dy); })
      .def_readonly("error", &LayerReport::error)
      .def_readonly("reliable", &LayerReport::reliable)
      .def_readonly("omega", &LayerReport::omega);

  py::class_<BlockReport>(m, "BlockReport")
      .def_readonly("frame", &BlockReport::frame)
      .def_property_readonly("block",
                             [](const BlockReport& r) { return py::make_tuple(r.block.bx, r.block.by); })
      .def_readonly("aligned", &BlockReport::aligned)
      .def_readonly("fallback_fill", &BlockReport::fallback_fill)
      .def_readonly("layers", &BlockReport::layers)
      .def_readonly("psnr", &BlockReport::psnr);

  py::class_<ConcealResult>(m, "ConcealResult")
      .def_readonly("video", &ConcealResult::video)
      .def_readonly("mask", &ConcealResult::mask)
      .def_readonly("report", &ConcealResult::report);

  m.def("conceal_sequence",
        [](const VideoSequence& s, const LossMask& mk, const ConcealConfig& cfg,
           const VideoSequence* original) {
          py::gil_scoped_release release;
          return conceal_sequence(s, mk, cfg, original);
        },
        py::arg("sequence"), py::arg("mask"), py::arg("config") = ConcealConfig{},
        py::arg("original") = nullptr);

  m.def("psnr_blocks", &psnr_blocks, py::arg("original"), py::arg("concealed"), py::arg("mask"));

  py::class_<TrainingPair>(m, "TrainingPair")
      .def(py::init([](double e, double w) { return TrainingPair{e, w}; }), py::arg("error"),
           py::arg("best_omega"))
      .def_readwrite("error", &TrainingPair::error)
      .def_readwrite("best_omega", &TrainingPair::best_omega);

  py::class_<WeightModel>(m, "WeightModel")
      .def_readonly("omega_max", &WeightModel::omega_max)
      .def_readonly("t_e", &WeightModel::t_e)
      .def_readonly("intercept", &WeightModel::intercept)
      .def_readonly("slope", &WeightModel::slope);

  m.def("default_omega_grid", &default_omega_grid);
  m.def("best_weight_search",
        [](const VideoSequence& buffer, const VideoSequence& original, const LossMask& mk,
           int frame, int bx, int by, const ConcealConfig& cfg, std::vector<double> grid) {
          py::gil_scoped_release release;
          return best_weight_search(buffer, original, mk, frame, {bx, by}, cfg, grid);
        },
        py::arg("buffer"), py::arg("original"), py::arg("mask"), py::arg("frame"), py::arg("bx"),
        py::arg("by"), py::arg("config") = ConcealConfig{}, py::arg("grid") = default_omega_grid());
  m.def("fit_weight_model",
        [](const std::vector<TrainingPair>& pairs) { return fit_weight_model(pairs); },
        py::arg("pairs"));
}
