// Python bindings: thin numpy-converting wrappers over the public C++ API.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>

#include "evp/geometry.hpp"
#include "evp/grids.hpp"
#include "evp/hmp.hpp"
#include "evp/image_io.hpp"
#include "evp/losses.hpp"
#include "evp/metrics.hpp"
#include "evp/pose_optim.hpp"
#include "evp/segmentation.hpp"
#include "evp/synth.hpp"

namespace py = pybind11;
using namespace evp;

namespace {

using ArrayD = py::array_t<double, py::array::c_style | py::array::forcecast>;

Grid<double> grid_from_array(const ArrayD& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  const int H = static_cast<int>(a.shape(0));
  const int W = static_cast<int>(a.shape(1));
  Grid<double> g(W, H, 0.0);
  auto r = a.unchecked<2>();
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) g.at(x, y) = r(y, x);
  return g;
}

py::array_t<double> array_from_grid(const Grid<double>& g) {
  py::array_t<double> a({g.height(), g.width()});
  auto r = a.mutable_unchecked<2>();
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) r(y, x) = g.at(x, y);
  return a;
}

ImageBuf image_from_array(const ArrayD& a) {
  if (a.ndim() != 2 && a.ndim() != 3)
    throw std::invalid_argument("expected a 2-D or 3-D array");
  const int H = static_cast<int>(a.shape(0));
  const int W = static_cast<int>(a.shape(1));
  const int C = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
  ImageBuf img(W, H, C, 0.0);
  if (a.ndim() == 2) {
    auto r = a.unchecked<2>();
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) img.at(x, y, 0) = r(y, x);
  } else {
    auto r = a.unchecked<3>();
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        for (int c = 0; c < C; ++c) img.at(x, y, c) = r(y, x, c);
  }
  return img;
}

py::array_t<double> array_from_image(const ImageBuf& img) {
  if (img.channels() == 1) {
    py::array_t<double> a({img.height(), img.width()});
    auto r = a.mutable_unchecked<2>();
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) r(y, x) = img.at(x, y, 0);
    return a;
  }
  py::array_t<double> a({img.height(), img.width(), img.channels()});
  auto r = a.mutable_unchecked<3>();
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) r(y, x, c) = img.at(x, y, c);
  return a;
}

FlowField2D flow_from_array(const ArrayD& a) {
  if (a.ndim() != 3 || a.shape(2) != 2)
    throw std::invalid_argument("expected an (H, W, 2) flow array");
  const int H = static_cast<int>(a.shape(0));
  const int W = static_cast<int>(a.shape(1));
  FlowField2D f(W, H);
  auto r = a.unchecked<3>();
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) f.vec.at(x, y) = {r(y, x, 0), r(y, x, 1)};
  return f;
}

py::array_t<double> array_from_flow(const FlowField2D& f) {
  py::array_t<double> a({f.height(), f.width(), 2});
  auto r = a.mutable_unchecked<3>();
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) {
      r(y, x, 0) = f.vec.at(x, y).x();
      r(y, x, 1) = f.vec.at(x, y).y();
    }
  return a;
}

py::array_t<double> array_from_motion(const MotionField3D& m) {
  py::array_t<double> a({m.height(), m.width(), 3});
  auto r = a.mutable_unchecked<3>();
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      for (int k = 0; k < 3; ++k) r(y, x, k) = m.at(x, y)[k];
  return a;
}

py::object opt(const std::optional<double>& v) {
  if (v) return py::float_(*v);
  return py::none();
}

}  // namespace

PYBIND11_MODULE(_evp, m) {
  m.doc() = "Holistic 3D motion decomposition: geometry, motion parsing, "
            "view-synthesis losses, pose optimization, segmentation and "
            "evaluation metrics.";

  py::class_<Intrinsics>(m, "Intrinsics")
      .def(py::init<double, double, double, double, int, int>(),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"),
           py::arg("width"), py::arg("height"))
      .def_readonly("fx", &Intrinsics::fx)
      .def_readonly("fy", &Intrinsics::fy)
      .def_readonly("cx", &Intrinsics::cx)
      .def_readonly("cy", &Intrinsics::cy)
      .def_readonly("width", &Intrinsics::width)
      .def_readonly("height", &Intrinsics::height)
      .def("matrix", &Intrinsics::matrix)
      .def("scaled", &Intrinsics::scaled, py::arg("factor"));

  py::class_<PoseSE3>(m, "PoseSE3")
      .def(py::init<>())
      .def(py::init<const Eigen::Matrix3d&, const Eigen::Vector3d&>(),
           py::arg("rotation"), py::arg("translation"))
      .def_property_readonly("rotation", &PoseSE3::rotation)
      .def_property_readonly("translation", &PoseSE3::translation)
      .def("compose", &PoseSE3::compose)
      .def("inverse", &PoseSE3::inverse);

  m.def("se3_exp", &se3_exp, py::arg("twist"));
  m.def("se3_log", &se3_log, py::arg("pose"));
  m.def("project", &project, py::arg("point"), py::arg("K"));
  m.def("backproject", &backproject, py::arg("pixel"), py::arg("depth"),
        py::arg("K"));
  m.def("pose_error", &pose_error, py::arg("estimate"), py::arg("truth"));

  m.def(
      "parse_motion",
      [](const ArrayD& depth_t, const ArrayD& depth_s, const ArrayD& flow_fwd,
         const ArrayD& flow_bwd, const PoseSE3& T, const ArrayD& segment,
         const Intrinsics& K, double alpha1, double alpha2) {
        const HMPOutput out =
            parse(grid_from_array(depth_t), grid_from_array(depth_s),
                  flow_from_array(flow_fwd), flow_from_array(flow_bwd), T,
                  grid_from_array(segment), K, alpha1, alpha2);
        py::dict d;
        d["visibility"] = array_from_grid(out.visibility);
        d["rigid"] = array_from_motion(out.rigid);
        d["dynamic"] = array_from_motion(out.dynamic);
        d["flow_background"] = array_from_motion(out.flow_background);
        return d;
      },
      py::arg("depth_t"), py::arg("depth_s"), py::arg("flow_fwd"),
      py::arg("flow_bwd"), py::arg("pose_ts"), py::arg("segment"),
      py::arg("K"), py::arg("alpha1") = 0.01, py::arg("alpha2") = 0.5,
      "Holistic motion parser: visibility plus rigid, dynamic and "
      "flow-derived background 3D motion fields.");

  m.def(
      "view_synthesis_cost",
      [](const ArrayD& img_t, const ArrayD& img_s, const ArrayD& depth_t,
         const PoseSE3& T, const Intrinsics& K, double beta) {
        return view_synthesis_cost(image_from_array(img_t),
                                   image_from_array(img_s),
                                   grid_from_array(depth_t), T, K, beta);
      },
      py::arg("img_t"), py::arg("img_s"), py::arg("depth_t"), py::arg("pose"),
      py::arg("K"), py::arg("beta") = 0.5);

  m.def(
      "grad_pose_vs",
      [](const ArrayD& img_t, const ArrayD& img_s, const ArrayD& depth_t,
         const PoseSE3& T, const Intrinsics& K, double beta) {
        return grad_pose_vs(image_from_array(img_t), image_from_array(img_s),
                            grid_from_array(depth_t), T, K, beta);
      },
      py::arg("img_t"), py::arg("img_s"), py::arg("depth_t"), py::arg("pose"),
      py::arg("K"), py::arg("beta") = 0.5);

  py::class_<OptimSettings>(m, "OptimSettings")
      .def(py::init<>())
      .def_readwrite("max_iters", &OptimSettings::max_iters)
      .def_readwrite("initial_step", &OptimSettings::initial_step)
      .def_readwrite("step_decrease", &OptimSettings::step_decrease)
      .def_readwrite("step_increase", &OptimSettings::step_increase)
      .def_readwrite("tolerance", &OptimSettings::tolerance)
      .def_readwrite("n_levels", &OptimSettings::n_levels)
      .def_readwrite("beta", &OptimSettings::beta);

  m.def(
      "estimate_pose",
      [](const ArrayD& img_t, const ArrayD& img_s, const ArrayD& depth_t,
         const Intrinsics& K, const PoseSE3& init,
         const OptimSettings& settings) {
        const PoseEstimate est =
            estimate_pose(image_from_array(img_t), image_from_array(img_s),
                          grid_from_array(depth_t), K, init, settings);
        py::dict d;
        d["pose"] = est.pose;
        d["final_loss"] = est.final_loss;
        d["iterations"] = est.iterations;
        d["level_traces"] = est.level_traces;
        return d;
      },
      py::arg("img_t"), py::arg("img_s"), py::arg("depth_t"), py::arg("K"),
      py::arg("init") = PoseSE3(), py::arg("settings") = OptimSettings());

  m.def(
      "segment_moving_objects",
      [](const ArrayD& depth_t, const ArrayD& depth_s, const ArrayD& flow_fwd,
         const ArrayD& flow_bwd, const PoseSE3& T, const Intrinsics& K) {
        return array_from_grid(segment_moving_objects(
            grid_from_array(depth_t), grid_from_array(depth_s),
            flow_from_array(flow_fwd), flow_from_array(flow_bwd), T, K));
      },
      py::arg("depth_t"), py::arg("depth_s"), py::arg("flow_fwd"),
      py::arg("flow_bwd"), py::arg("pose_ts"), py::arg("K"));

  m.def(
      "median_scale",
      [](const ArrayD& pred, const ArrayD& gt, const ArrayD& valid) {
        auto [scaled, factor] = median_scale(
            grid_from_array(pred), grid_from_array(gt), grid_from_array(valid));
        return py::make_tuple(array_from_grid(scaled), factor);
      },
      py::arg("pred"), py::arg("gt"), py::arg("valid"));

  m.def(
      "eval_depth",
      [](const ArrayD& pred, const ArrayD& gt, const ArrayD& valid, double cap,
         double cap_min) {
        const DepthEvalResult r =
            eval_depth(grid_from_array(pred), grid_from_array(gt),
                       grid_from_array(valid), cap, cap_min);
        py::dict d;
        d["abs_rel"] = r.abs_rel;
        d["sq_rel"] = r.sq_rel;
        d["rmse"] = r.rmse;
        d["rmse_log"] = r.rmse_log;
        d["delta1"] = r.delta1;
        d["delta2"] = r.delta2;
        d["delta3"] = r.delta3;
        return d;
      },
      py::arg("pred"), py::arg("gt"), py::arg("valid"), py::arg("cap") = 80.0,
      py::arg("cap_min") = 1e-3);

  m.def(
      "eval_scene_flow",
      [](const ArrayD& d1_pred, const ArrayD& d1_gt, const ArrayD& d2_pred,
         const ArrayD& d2_gt, const ArrayD& flow_pred, const ArrayD& flow_gt,
         const ArrayD& fg_mask, const ArrayD& valid, bool outlier_rate) {
        SceneFlowOptions o;
        o.outlier_rate = outlier_rate;
        const SceneFlowEvalResult r = eval_scene_flow(
            grid_from_array(d1_pred), grid_from_array(d1_gt),
            grid_from_array(d2_pred), grid_from_array(d2_gt),
            flow_from_array(flow_pred), flow_from_array(flow_gt),
            grid_from_array(fg_mask), grid_from_array(valid), o);
        py::dict d;
        for (auto [name, s] : {std::pair{"d1", r.d1}, std::pair{"d2", r.d2},
                               std::pair{"fl", r.fl}}) {
          py::dict split;
          split["bg"] = opt(s.bg);
          split["fg"] = opt(s.fg);
          split["bg_fg"] = opt(s.bg_fg);
          d[name] = split;
        }
        return d;
      },
      py::arg("d1_pred"), py::arg("d1_gt"), py::arg("d2_pred"),
      py::arg("d2_gt"), py::arg("flow_pred"), py::arg("flow_gt"),
      py::arg("fg_mask"), py::arg("valid"), py::arg("outlier_rate") = false);

  m.def(
      "eval_segmentation",
      [](const ArrayD& pred, const ArrayD& gt) {
        const SegEvalResult r =
            eval_segmentation(grid_from_array(pred), grid_from_array(gt));
        py::dict d;
        d["pixel_acc"] = r.pixel_acc;
        d["mean_acc"] = r.mean_acc;
        d["mean_iou"] = r.mean_iou;
        d["fw_iou"] = r.fw_iou;
        return d;
      },
      py::arg("pred"), py::arg("gt"));

  py::class_<BoxSpec>(m, "BoxSpec")
      .def(py::init<>())
      .def_readwrite("x0", &BoxSpec::x0)
      .def_readwrite("y0", &BoxSpec::y0)
      .def_readwrite("size_x", &BoxSpec::size_x)
      .def_readwrite("size_y", &BoxSpec::size_y)
      .def_readwrite("depth", &BoxSpec::depth)
      .def_readwrite("velocity", &BoxSpec::velocity);

  py::class_<SceneSpec>(m, "SceneSpec")
      .def(py::init<>())
      .def_readwrite("width", &SceneSpec::width)
      .def_readwrite("height", &SceneSpec::height)
      .def_readwrite("fx", &SceneSpec::fx)
      .def_readwrite("fy", &SceneSpec::fy)
      .def_readwrite("cx", &SceneSpec::cx)
      .def_readwrite("cy", &SceneSpec::cy)
      .def_readwrite("bg_depth", &SceneSpec::bg_depth)
      .def_readwrite("texture_seed", &SceneSpec::texture_seed)
      .def_readwrite("has_box", &SceneSpec::has_box)
      .def_readwrite("box", &SceneSpec::box)
      .def_readwrite("cam_twist", &SceneSpec::cam_twist)
      .def_readwrite("baseline", &SceneSpec::baseline)
      .def_readwrite("n_frames", &SceneSpec::n_frames);

  m.def(
      "synthesize_scene",
      [](const SceneSpec& spec) {
        py::list out;
        for (const FrameBundle& b : synthesize_scene(spec)) {
          py::dict d;
          d["img_t"] = array_from_image(b.img_t);
          d["img_s"] = array_from_image(b.img_s);
          d["depth_t"] = array_from_grid(b.depth_t);
          d["depth_s"] = array_from_grid(b.depth_s);
          d["flow_fwd"] = array_from_flow(b.flow_fwd);
          d["flow_bwd"] = array_from_flow(b.flow_bwd);
          d["pose_ts"] = b.T_ts;
          d["segment"] = array_from_grid(b.segment);
          d["visibility"] = array_from_grid(b.visibility);
          d["K"] = b.K;
          if (b.has_stereo) {
            d["img_c"] = array_from_image(b.img_c);
            d["depth_c"] = array_from_grid(b.depth_c);
            d["pose_tc"] = b.T_tc;
          }
          out.append(d);
        }
        return out;
      },
      py::arg("spec"),
      "Renders a synthetic scene; returns one dict per consecutive frame "
      "pair with images, depths, flows, poses and masks.");

  m.def(
      "read_pfm",
      [](const std::string& path) { return array_from_grid(read_pfm(path)); },
      py::arg("path"));
  m.def(
      "write_pfm",
      [](const std::string& path, const ArrayD& grid) {
        write_pfm(path, grid_from_array(grid));
      },
      py::arg("path"), py::arg("grid"));
  m.def(
      "read_image",
      [](const std::string& path) {
        return array_from_image(read_image(path));
      },
      py::arg("path"));
  m.def(
      "write_image",
      [](const std::string& path, const ArrayD& img, int bit_depth) {
        write_image(path, image_from_array(img), bit_depth);
      },
      py::arg("path"), py::arg("image"), py::arg("bit_depth") = 8);

  py::register_exception<FormatError>(m, "FormatError");
}
