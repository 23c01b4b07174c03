#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "editreg/error.hpp"
#include "editreg/filter.hpp"
#include "editreg/formats.hpp"
#include "editreg/grasp.hpp"
#include "editreg/io.hpp"
#include "editreg/pipeline.hpp"
#include "editreg/register.hpp"
#include "editreg/synth.hpp"

namespace py = pybind11;
using namespace editreg;

namespace {

using Points = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Vec3> to_points(const Points& a, const char* name) {
    if (a.ndim() != 2 || a.shape(1) != 3) throw py::value_error(std::string(name) + " must have shape (N, 3)");
    const auto r = a.unchecked<2>();
    std::vector<Vec3> out(static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.shape(0); ++i) out[static_cast<std::size_t>(i)] = {r(i, 0), r(i, 1), r(i, 2)};
    return out;
}

py::array_t<double> from_points(std::span<const Vec3> pts) {
    py::array_t<double> a({static_cast<py::ssize_t>(pts.size()), py::ssize_t{3}});
    auto w = a.mutable_unchecked<2>();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (int k = 0; k < 3; ++k) w(static_cast<py::ssize_t>(i), k) = pts[i][k];
    return a;
}

py::array_t<double> from_mat(const Mat3& m) {
    py::array_t<double> a({3, 3});
    std::memcpy(a.mutable_data(), m.m.data(), sizeof(double) * 9);
    return a;
}

py::array_t<double> from_vec(const Vec3& v) {
    py::array_t<double> a(3);
    auto w = a.mutable_unchecked<1>();
    for (int k = 0; k < 3; ++k) w(k) = v[k];
    return a;
}

py::array_t<double> homogeneous(const RigidTransform& t) {
    py::array_t<double> a({4, 4});
    auto w = a.mutable_unchecked<2>();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) w(r, c) = r == 3 ? (c == 3 ? 1.0 : 0.0) : (c == 3 ? t.translation()[r] : t.rotation()(r, c));
    return a;
}

RigidTransform rigid_from(const Points& a) {
    if (a.ndim() != 2 || a.shape(0) != 4 || a.shape(1) != 4) throw py::value_error("transform must have shape (4, 4)");
    const auto r = a.unchecked<2>();
    Mat3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = r(i, j);
    return {m, {r(0, 3), r(1, 3), r(2, 3)}};
}

py::dict similarity_dict(const SimilarityTransform& t) {
    py::dict d;
    d["scale"] = t.scale();
    d["rotation"] = from_mat(t.rotation());
    d["translation"] = from_vec(t.translation());
    return d;
}

py::dict cloud_dict(const FeatureCloud& c) {
    const auto n = static_cast<py::ssize_t>(c.size());
    py::array_t<float> feats({n, static_cast<py::ssize_t>(c.feature_dim())});
    std::memcpy(feats.mutable_data(), c.features().data(), c.features().size_bytes());
    py::array_t<int> pix({n, py::ssize_t{2}});
    py::array_t<std::uint8_t> labels(n);
    auto pw = pix.mutable_unchecked<2>();
    auto lw = labels.mutable_unchecked<1>();
    for (py::ssize_t i = 0; i < n; ++i) {
        pw(i, 0) = c.pixels()[static_cast<std::size_t>(i)].row;
        pw(i, 1) = c.pixels()[static_cast<std::size_t>(i)].col;
        lw(i) = static_cast<std::uint8_t>(c.labels()[static_cast<std::size_t>(i)]);
    }
    py::dict d;
    d["points"] = from_points(c.points());
    d["features"] = feats;
    d["pixels"] = pix;
    d["labels"] = labels;
    d["image_width"] = c.image_width();
    d["image_height"] = c.image_height();
    return d;
}

FeatureCloud cloud_from(const py::dict& d) {
    auto pts = to_points(d["points"].cast<Points>(), "points");
    const auto feats = d["features"].cast<py::array_t<float, py::array::c_style | py::array::forcecast>>();
    const auto pix = d["pixels"].cast<py::array_t<int, py::array::c_style | py::array::forcecast>>();
    const auto labels = d["labels"].cast<py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>>();
    if (feats.ndim() != 2 || pix.ndim() != 2 || pix.shape(1) != 2 || labels.ndim() != 1)
        throw py::value_error("features must be (N, D), pixels (N, 2), labels (N,)");
    std::vector<float> f(feats.data(), feats.data() + feats.size());
    std::vector<PixelIndex> p(static_cast<std::size_t>(pix.shape(0)));
    const auto pr = pix.unchecked<2>();
    for (py::ssize_t i = 0; i < pix.shape(0); ++i) p[static_cast<std::size_t>(i)] = {pr(i, 0), pr(i, 1)};
    std::vector<Label> l(static_cast<std::size_t>(labels.shape(0)));
    for (py::ssize_t i = 0; i < labels.shape(0); ++i) l[static_cast<std::size_t>(i)] = static_cast<Label>(labels.at(i));
    return {d["image_width"].cast<int>(), d["image_height"].cast<int>(), static_cast<int>(feats.shape(1)), std::move(pts),
            std::move(f), std::move(p), std::move(l)};
}

py::dict filter_dict(const FilterResult& r) {
    py::dict d;
    d["cloud"] = cloud_dict(r.kept);
    d["kept_indices"] = r.kept_indices;
    d["cluster_labels"] = r.cluster_labels;
    return d;
}

}  // namespace

PYBIND11_MODULE(_editreg, m) {
    m.doc() = "Native core of editreg";

    static py::exception<Error> error_type(m, "Error", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = py::handle(error_type)(e.what());
            err.attr("code") = to_string(e.code());
            err.attr("stage") = e.stage();
            PyErr_SetObject(error_type.ptr(), err.ptr());
        }
    });

    m.def(
        "umeyama",
        [](const Points& obs, const Points& edit) { return similarity_dict(umeyama(to_points(obs, "obs"), to_points(edit, "edit"))); },
        py::arg("obs"), py::arg("edit"), "Least-squares similarity mapping obs onto edit.");

    m.def(
        "relative_transform",
        [](double sp, const Points& rp, const Points& tp, double sa, const Points& ra, const Points& ta) {
            auto mat = [](const Points& a) {
                if (a.size() != 9) throw py::value_error("rotation must have 9 entries");
                Mat3 r;
                std::memcpy(r.m.data(), a.data(), sizeof(double) * 9);
                return r;
            };
            auto vec = [](const Points& a) {
                if (a.size() != 3) throw py::value_error("translation must have 3 entries");
                return Vec3{a.data()[0], a.data()[1], a.data()[2]};
            };
            return homogeneous(relative_transform({sp, mat(rp), vec(tp)}, {sa, mat(ra), vec(ta)}));
        },
        py::arg("passive_scale"), py::arg("passive_rotation"), py::arg("passive_translation"), py::arg("active_scale"),
        py::arg("active_rotation"), py::arg("active_translation"),
        "Scale-free active-relative-to-passive pose; both scales must be equal.");

    m.def(
        "to_world",
        [](const Points& rel, const Points& o2w) { return homogeneous(to_world(rigid_from(rel), rigid_from(o2w))); },
        py::arg("rel"), py::arg("o2w"));

    m.def(
        "generate_scene",
        [](const std::string& task, std::uint64_t seed, const std::filesystem::path& out, double depth_sigma,
           double flying_edge, double feature_noise, int grasps, double yaw_deg) {
            synth::SceneOptions opt;
            opt.yaw_deg = yaw_deg;
            auto sc = synth::generate(synth::parse_task(task), {depth_sigma, flying_edge, feature_noise}, seed, opt);
            if (grasps > 0) sc.obs.grasps = synth::grasp_candidates(sc, grasps, seed);
            io::save_synthetic(sc, out);
            return homogeneous(sc.gt_motion);
        },
        py::arg("task"), py::arg("seed"), py::arg("out"), py::arg("depth_sigma") = 0.0, py::arg("flying_edge") = 0.0,
        py::arg("feature_noise") = 0.0, py::arg("grasps") = 0, py::arg("yaw_deg") = 0.0,
        "Writes obs/, edit/ and gt.json under `out`; returns the ground-truth world motion.");

    m.def(
        "load_scene",
        [](const std::filesystem::path& dir) {
            const auto b = io::load_scene(dir);
            const int w = b.image.width(), h = b.image.height();
            py::array_t<std::uint8_t> image({h, w, 3});
            std::memcpy(image.mutable_data(), b.image.rgb().data(), b.image.rgb().size());
            py::array_t<float> depth({h, w});
            std::memcpy(depth.mutable_data(), b.depth.values().data(), b.depth.values().size_bytes());
            auto mask = [&](const Mask& mk) {
                py::array_t<bool> a({h, w});
                auto* d = a.mutable_data();
                for (std::size_t i = 0; i < mk.bits().size(); ++i) d[i] = mk.bits()[i] != 0;
                return a;
            };
            py::array_t<float> feats({h, w, b.features.dim()});
            std::memcpy(feats.mutable_data(), b.features.data().data(), b.features.data().size_bytes());
            py::dict d;
            d["image"] = image;
            d["depth"] = depth;
            d["mask_active"] = mask(b.masks.active);
            d["mask_passive"] = mask(b.masks.passive);
            d["features"] = feats;
            d["intrinsics"] = py::make_tuple(b.intr.fx(), b.intr.fy(), b.intr.cx(), b.intr.cy());
            d["o2w"] = homogeneous(b.o2w);
            d["instruction"] = b.instruction;
            d["grasps"] = b.grasps.size();
            return d;
        },
        py::arg("dir"));

    m.def(
        "read_cloud", [](const std::filesystem::path& p) { return cloud_dict(formats::read_cloud(p)); }, py::arg("path"));
    m.def(
        "write_cloud", [](const std::filesystem::path& p, const py::dict& c) { formats::write_cloud(p, cloud_from(c)); },
        py::arg("path"), py::arg("cloud"));

    m.def(
        "hierarchical_filter",
        [](const py::dict& c, int k_layers, double eps, int min_pts, int s_min, std::uint64_t seed) {
            FilterConfig cfg{k_layers, eps, min_pts, s_min, seed};
            return filter_dict(hierarchical_filter(cloud_from(c), cfg));
        },
        py::arg("cloud"), py::arg("k_layers") = FilterConfig{}.k_layers, py::arg("eps") = FilterConfig{}.eps,
        py::arg("min_pts") = FilterConfig{}.min_pts, py::arg("s_min") = FilterConfig{}.s_min, py::arg("seed") = 0);

    m.def(
        "spatial_filter",
        [](const py::dict& c, double eps, int min_pts) { return filter_dict(spatial_dbscan_filter(cloud_from(c), eps, min_pts)); },
        py::arg("cloud"), py::arg("eps") = FilterConfig{}.eps, py::arg("min_pts") = FilterConfig{}.min_pts);

    m.def(
        "convex_hull",
        [](const Points& pts) {
            const auto h = convex_hull(to_points(pts, "points"));
            return py::make_tuple(from_points(h.vertices), h.faces);
        },
        py::arg("points"), "Returns (vertices, faces) with outward-oriented triangles.");

    m.def(
        "collides",
        [](const Points& hull_points, const Points& pts, double margin) {
            return collides(passive_hull(to_points(hull_points, "hull_points")), to_points(pts, "points"), margin);
        },
        py::arg("hull_points"), py::arg("points"), py::arg("margin") = kDefaultGraspMargin);

    m.def(
        "filter_grasps",
        [](const std::string& grasps_json, const Points& t_a, const Points& passive_points, double margin) {
            const auto g = io::decode_grasps(grasps_json);
            const auto hull = passive_hull(to_points(passive_points, "passive_points"));
            return grasp_keep_flags(g, rigid_from(t_a), hull, margin);
        },
        py::arg("grasps_json"), py::arg("t_a"), py::arg("passive_points"), py::arg("margin") = kDefaultGraspMargin,
        "Keep flag per candidate after moving it by T_a.");

    m.def(
        "run_pipeline",
        [](const std::filesystem::path& obs, const std::filesystem::path& edit, std::optional<std::string> config_json) {
            const PipelineConfig cfg = config_json ? parse_config(*config_json) : PipelineConfig{};
            return report_to_json(run_pipeline(obs, edit, cfg));
        },
        py::arg("obs"), py::arg("edit"), py::arg("config_json") = std::nullopt, "Returns the report as JSON text.");

    m.def(
        "default_config", [] { return config_to_json(PipelineConfig{}); });
}
