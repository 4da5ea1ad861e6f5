// Command-line front end: preprocessing, gradient estimation, depth
// reconstruction, arc-length unwarping, silhouette reconstruction, synthetic
// phantoms, and metric evaluation.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fingeo/imgio.hpp"
#include "fingeo/metrics.hpp"
#include "fingeo/phantom.hpp"
#include "fingeo/preprocess.hpp"
#include "fingeo/silhouette.hpp"
#include "fingeo/surface.hpp"
#include "fingeo/texture.hpp"
#include "fingeo/unwarp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fingeo;

namespace {

int log_level() {
    static const int level = [] {
        const char* v = std::getenv("FINGEO_LOG");
        if (!v)
            return 0;
        const std::string s(v);
        if (s == "debug")
            return 2;
        if (s == "info")
            return 1;
        return 0;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1)
        std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() >= 2)
        std::cerr << "[debug] " << msg << "\n";
}

void emit_error(int code, const std::string& stage, const std::string& message) {
    json j{{"code", code}, {"stage", stage}, {"message", message}};
    std::cerr << j.dump() << "\n";
}

struct PreprocOptions {
    float target_period = 10.0f;
    int tile = 32;
    float clip = 2.0f;
};

struct PreprocOut {
    GrayImage image;
    Mask mask;
    preprocess::PreprocessReport report;
};

PreprocOut run_preprocess(const GrayImage& input, const PreprocOptions& opt) {
    Mask mask = preprocess::segment(input);
    GrayImage enhanced = preprocess::enhance(input, mask, opt.tile, opt.clip);
    auto orient = texture::estimate_orientation_field(enhanced, mask);
    auto region = preprocess::center_region(mask);
    const float period = preprocess::mean_ridge_period(enhanced, region, orient.theta);
    log_debug("measured center ridge period: " + std::to_string(period) + " px");
    auto scaled = preprocess::rescale_to_period(enhanced, mask, period,
                                                opt.target_period);
    const float yaw = preprocess::estimate_yaw(scaled.mask);
    log_debug("estimated yaw: " + std::to_string(yaw) + " deg");
    auto upright = preprocess::rotate_upright(scaled.image, scaled.mask, yaw);
    PreprocOut out;
    out.image = std::move(upright.image);
    out.mask = std::move(upright.mask);
    out.report = {scaled.scale_factor, yaw, period};
    return out;
}

GradientMap estimate_gradient(const GrayImage& image, const Mask& mask) {
    auto orient = texture::estimate_orientation_field(image, mask);
    PeriodMap period = texture::estimate_period_map(image, mask, orient.theta);
    auto region = preprocess::center_region(mask);
    const float p0 = preprocess::mean_ridge_period(image, region, orient.theta);
    size_t clamped = 0;
    auto grad = texture::gradient_from_texture(period, orient.theta, mask, p0,
                                               &clamped);
    log_debug("reference period " + std::to_string(p0) + " px, " +
              std::to_string(clamped) + " px clamped to zero slant");
    return grad;
}

void min_align_depth(DepthMap& depth, const Mask& mask) {
    float lo = std::numeric_limits<float>::infinity();
    for (int y = 0; y < depth.height; ++y)
        for (int x = 0; x < depth.width; ++x)
            if (mask.at(x, y))
                lo = std::min(lo, depth.at(x, y));
    if (!std::isfinite(lo))
        return;
    for (int y = 0; y < depth.height; ++y)
        for (int x = 0; x < depth.width; ++x)
            if (mask.at(x, y))
                depth.at(x, y) -= lo;
}

void write_unwarp_outputs(const GrayImage& image, const Mask& mask,
                          const GradientMap& grad, const std::string& out_path) {
    const auto zero = surface::find_zero_point(grad, mask);
    auto coords = unwarp::arc_length_coords(grad, mask, zero);
    auto res = unwarp::unwarp_image(image, mask, coords, zero);
    imgio::write_pgm(res.image, out_path);
    fs::path mp(out_path);
    mp.replace_filename(mp.stem().string() + "_mask.pgm");
    imgio::write_mask_pgm(res.mask, mp.string());
    imgio::Manifest man;
    man.stage = "unwarp";
    man.zero_point = {static_cast<double>(zero.first),
                      static_cast<double>(zero.second)};
    man.canvas_offset = {static_cast<double>(res.offset_x),
                         static_cast<double>(res.offset_y)};
    imgio::write_manifest(man, imgio::manifest_path_for(out_path));
}

void pipeline_one(const fs::path& in, const fs::path& out_dir,
                  const PreprocOptions& opt) {
    const std::string stem = in.stem().string();
    auto path = [&](const std::string& suffix) {
        return (out_dir / (stem + suffix)).string();
    };
    log_info("pipeline: " + in.string());
    GrayImage input = imgio::read_pgm(in.string());

    auto pre = run_preprocess(input, opt);
    imgio::write_pgm(pre.image, path("_enhanced.pgm"));
    imgio::write_mask_pgm(pre.mask, path("_mask.pgm"));
    imgio::Manifest man;
    man.stage = "preprocess";
    man.scale_factor = pre.report.scale_factor;
    man.yaw_deg = pre.report.yaw_deg;
    imgio::write_manifest(man, imgio::manifest_path_for(path("_enhanced.pgm")));

    GradientMap grad = estimate_gradient(pre.image, pre.mask);
    imgio::write_gradient(grad, path("_gradient.fgrd"), pre.image.pitch_mm);

    const auto zero = surface::find_zero_point(grad, pre.mask);
    DepthMap rough = surface::integrate_gradient(grad, pre.mask, zero);
    GradientMap smooth_grad(grad.width, grad.height);
    DepthMap depth = surface::mls_smooth(rough, pre.mask, 64, 8.0f, nullptr,
                                         &smooth_grad);
    min_align_depth(depth, pre.mask);
    imgio::write_depth(depth, path("_depth.fgrd"), pre.image.pitch_mm);

    write_unwarp_outputs(pre.image, pre.mask, smooth_grad, path("_unwarped.pgm"));
}

std::vector<fs::path> collect_inputs(const std::string& in) {
    std::vector<fs::path> files;
    if (fs::is_directory(in)) {
        for (const auto& e : fs::directory_iterator(in))
            if (e.is_regular_file() && e.path().extension() == ".pgm")
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        if (files.empty())
            throw FormatError("no .pgm inputs in directory " + in);
    } else {
        files.emplace_back(in);
    }
    return files;
}

PeriodMap grid_as_period(const imgio::GridFile& g) {
    if (g.channels != 1)
        throw TypeMismatchError("expected a 1-channel grid");
    PeriodMap p(static_cast<int>(g.width), static_cast<int>(g.height));
    p.v = g.data;
    return p;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monocular 3D finger-surface reconstruction and unwarping"};
    app.require_subcommand(1);

    // preprocess
    auto* sc_pre = app.add_subcommand("preprocess", "Segment, enhance, normalize");
    std::string pre_in, pre_out_dir;
    PreprocOptions pre_opt;
    sc_pre->add_option("--in", pre_in, "Input PGM")->required();
    sc_pre->add_option("--out-dir", pre_out_dir, "Output directory")->required();
    sc_pre->add_option("--target-period", pre_opt.target_period, "Ridge period after rescale, px");
    sc_pre->add_option("--tile", pre_opt.tile, "Equalization tile size, px");
    sc_pre->add_option("--clip", pre_opt.clip, "Equalization clip limit");

    // gradient
    auto* sc_grad = app.add_subcommand("gradient", "Surface gradient from ridge texture");
    std::string g_in, g_mask, g_out, g_method = "texture", g_file;
    sc_grad->add_option("--in", g_in, "Input PGM")->required();
    sc_grad->add_option("--mask", g_mask, "Mask PGM")->required();
    sc_grad->add_option("--out", g_out, "Output gradient FGRD")->required();
    sc_grad->add_option("--method", g_method, "texture|file")
        ->check(CLI::IsMember({"texture", "file"}));
    sc_grad->add_option("--grad-file", g_file, "Gradient FGRD for --method file");

    // reconstruct
    auto* sc_rec = app.add_subcommand("reconstruct", "Depth from gradient");
    std::string r_grad, r_mask, r_out;
    bool r_mls = true;
    sc_rec->add_option("--grad", r_grad, "Gradient FGRD")->required();
    sc_rec->add_option("--mask", r_mask, "Mask PGM")->required();
    sc_rec->add_option("--out", r_out, "Output depth FGRD")->required();
    sc_rec->add_flag("--mls,!--no-mls", r_mls, "Moving-least-squares smoothing");

    // unwarp
    auto* sc_unw = app.add_subcommand("unwarp", "Arc-length unwarping");
    std::string u_in, u_grad, u_mask, u_out;
    sc_unw->add_option("--in", u_in, "Input PGM")->required();
    sc_unw->add_option("--grad", u_grad, "Gradient FGRD")->required();
    sc_unw->add_option("--mask", u_mask, "Mask PGM")->required();
    sc_unw->add_option("--out", u_out, "Output unwarped PGM")->required();

    // pipeline
    auto* sc_pipe = app.add_subcommand("pipeline", "All stages in order");
    std::string p_in, p_out_dir;
    PreprocOptions p_opt;
    int p_jobs = 1;
    sc_pipe->add_option("--in", p_in, "Input PGM or directory of PGMs")->required();
    sc_pipe->add_option("--out-dir", p_out_dir, "Output directory")->required();
    sc_pipe->add_option("--target-period", p_opt.target_period, "Ridge period after rescale, px");
    sc_pipe->add_option("--tile", p_opt.tile, "Equalization tile size, px");
    sc_pipe->add_option("--clip", p_opt.clip, "Equalization clip limit");
    sc_pipe->add_option("--jobs", p_jobs, "Parallel workers across files")
        ->check(CLI::PositiveNumber);

    // silhouette
    auto* sc_sil = app.add_subcommand("silhouette", "Three-view reconstruction");
    std::string s_front, s_right, s_left, s_out_dir;
    double s_angle = 45.0;
    sc_sil->add_option("--front", s_front, "Front mask PGM")->required();
    sc_sil->add_option("--right", s_right, "Right mask PGM")->required();
    sc_sil->add_option("--left", s_left, "Left mask PGM")->required();
    sc_sil->add_option("--out-dir", s_out_dir, "Output directory")->required();
    sc_sil->add_option("--angle", s_angle, "Side-view angle, degrees");

    // phantom
    auto* sc_ph = app.add_subcommand("phantom", "Analytic synthetic finger");
    std::string ph_shape = "hemisphere", ph_out_dir;
    std::vector<double> ph_radius{64.0};
    double ph_period = 10.0;
    int ph_size = 160;
    sc_ph->add_option("--shape", ph_shape, "hemisphere|ellipsoid")
        ->check(CLI::IsMember({"hemisphere", "ellipsoid"}));
    sc_ph->add_option("--radius", ph_radius, "Semi-axes: R or Rx,Ry,Rz px")
        ->delimiter(',')
        ->expected(1, 3);
    sc_ph->add_option("--period", ph_period, "Ridge period, px");
    sc_ph->add_option("--size", ph_size, "Grid side length, px");
    sc_ph->add_option("--out-dir", ph_out_dir, "Output directory")->required();

    // eval
    auto* sc_ev = app.add_subcommand("eval", "Error metrics, JSON to stdout");
    std::string e_pred, e_truth, e_mask, e_kind;
    bool e_weighted = false;
    double e_sigma = 0.5;
    int e_margin = 3;
    sc_ev->add_option("--pred", e_pred, "Predicted FGRD")->required();
    sc_ev->add_option("--truth", e_truth, "Ground-truth FGRD")->required();
    sc_ev->add_option("--mask", e_mask, "Mask PGM")->required();
    sc_ev->add_option("--kind", e_kind, "depth|gradient|period|orientation")
        ->required()
        ->check(CLI::IsMember({"depth", "gradient", "period", "orientation"}));
    sc_ev->add_flag("--weighted", e_weighted, "Weight by exp(-|g*|/sigma)");
    sc_ev->add_option("--sigma", e_sigma, "Weighting scale");
    sc_ev->add_option("--margin", e_margin, "Mask erosion before scoring, px");

    std::string stage = "cli";
    try {
        app.parse(argc, argv);
        stage = app.get_subcommands().front()->get_name();

        if (sc_pre->parsed()) {
            fs::create_directories(pre_out_dir);
            GrayImage input = imgio::read_pgm(pre_in);
            auto pre = run_preprocess(input, pre_opt);
            const std::string stem = fs::path(pre_in).stem().string();
            const auto img_path = (fs::path(pre_out_dir) / (stem + "_enhanced.pgm")).string();
            imgio::write_pgm(pre.image, img_path);
            imgio::write_mask_pgm(pre.mask,
                                  (fs::path(pre_out_dir) / (stem + "_mask.pgm")).string());
            imgio::Manifest man;
            man.stage = "preprocess";
            man.scale_factor = pre.report.scale_factor;
            man.yaw_deg = pre.report.yaw_deg;
            imgio::write_manifest(man, imgio::manifest_path_for(img_path));
        } else if (sc_grad->parsed()) {
            GradientMap grad;
            float pitch = kDefaultPitchMm;
            if (g_method == "file") {
                if (g_file.empty())
                    throw CLI::ValidationError("--method file requires --grad-file");
                grad = imgio::read_gradient(g_file, &pitch);
            } else {
                GrayImage image = imgio::read_pgm(g_in);
                Mask mask = imgio::read_mask_pgm(g_mask);
                require_same_dims(image, mask, "gradient");
                grad = estimate_gradient(image, mask);
                pitch = image.pitch_mm;
            }
            imgio::write_gradient(grad, g_out, pitch);
        } else if (sc_rec->parsed()) {
            float pitch = kDefaultPitchMm;
            GradientMap grad = imgio::read_gradient(r_grad, &pitch);
            Mask mask = imgio::read_mask_pgm(r_mask);
            require_same_dims(grad, mask, "reconstruct");
            const auto zero = surface::find_zero_point(grad, mask);
            DepthMap depth = surface::integrate_gradient(grad, mask, zero);
            if (r_mls) {
                depth = surface::mls_smooth(depth, mask);
                min_align_depth(depth, mask);
            }
            imgio::write_depth(depth, r_out, pitch);
        } else if (sc_unw->parsed()) {
            GrayImage image = imgio::read_pgm(u_in);
            Mask mask = imgio::read_mask_pgm(u_mask);
            GradientMap grad = imgio::read_gradient(u_grad);
            require_same_dims(image, mask, "unwarp");
            write_unwarp_outputs(image, mask, grad, u_out);
        } else if (sc_pipe->parsed()) {
            fs::create_directories(p_out_dir);
            auto files = collect_inputs(p_in);
            const int jobs = std::min<int>(p_jobs, static_cast<int>(files.size()));
            if (jobs <= 1) {
                for (const auto& f : files)
                    pipeline_one(f, p_out_dir, p_opt);
            } else {
                std::atomic<size_t> next{0};
                std::vector<std::thread> workers;
                std::atomic<bool> failed{false};
                std::string first_error;
                std::mutex err_mu;
                for (int t = 0; t < jobs; ++t)
                    workers.emplace_back([&] {
                        for (size_t i = next.fetch_add(1); i < files.size();
                             i = next.fetch_add(1)) {
                            try {
                                pipeline_one(files[i], p_out_dir, p_opt);
                            } catch (const std::exception& e) {
                                std::lock_guard<std::mutex> lk(err_mu);
                                if (!failed.exchange(true))
                                    first_error = e.what();
                            }
                        }
                    });
                for (auto& w : workers)
                    w.join();
                if (failed)
                    throw ReconstructionError(first_error);
            }
        } else if (sc_sil->parsed()) {
            fs::create_directories(s_out_dir);
            Mask mf = imgio::read_mask_pgm(s_front);
            Mask mr = imgio::read_mask_pgm(s_right);
            Mask ml = imgio::read_mask_pgm(s_left);
            auto cf = silhouette::extract_contours(mf);
            auto cr = silhouette::extract_contours(mr);
            auto cl = silhouette::extract_contours(ml);
            silhouette::FitReport report;
            auto ellipses = silhouette::fit_row_ellipses(cf, cr, cl, &report);
            auto depths = silhouette::build_three_view_depths(ellipses, mf.width,
                                                              mf.height, s_angle);
            auto out = [&](const std::string& n) {
                return (fs::path(s_out_dir) / n).string();
            };
            imgio::write_depth(depths.z_front, out("z_front.fgrd"));
            imgio::write_depth(depths.z_right, out("z_right.fgrd"));
            imgio::write_depth(depths.z_left, out("z_left.fgrd"));
            imgio::write_mask_pgm(depths.m_front, out("m_front.pgm"));
            imgio::write_mask_pgm(depths.m_right, out("m_right.pgm"));
            imgio::write_mask_pgm(depths.m_left, out("m_left.pgm"));
            double occ = 0.0;
            for (const auto& e : ellipses)
                occ += silhouette::occlusion_angle(e.a, e.b);
            json rep{{"fitted_rows", report.fitted_rows},
                     {"skipped_rows", report.skipped_rows},
                     {"mean_occlusion_angle_deg",
                      ellipses.empty() ? 0.0 : occ / ellipses.size()}};
            std::cout << rep.dump() << "\n";
        } else if (sc_ph->parsed()) {
            fs::create_directories(ph_out_dir);
            phantom::PhantomSpec spec;
            spec.shape = ph_shape == "ellipsoid" ? phantom::Shape::Ellipsoid
                                                 : phantom::Shape::Hemisphere;
            spec.rx = ph_radius[0];
            spec.ry = ph_radius.size() > 1 ? ph_radius[1] : ph_radius[0];
            spec.rz = ph_radius.size() > 2 ? ph_radius[2] : ph_radius[0];
            spec.p0 = ph_period;
            spec.width = ph_size;
            spec.height = ph_size;
            auto b = phantom::generate(spec);
            auto out = [&](const std::string& n) {
                return (fs::path(ph_out_dir) / n).string();
            };
            imgio::write_pgm(b.image, out("image.pgm"));
            imgio::write_mask_pgm(b.mask, out("mask.pgm"));
            imgio::write_depth(b.depth, out("depth.fgrd"));
            imgio::write_gradient(b.gradient, out("gradient.fgrd"));
            imgio::write_period(b.period_truth, out("period.fgrd"));
            imgio::Manifest man;
            man.stage = "phantom";
            imgio::write_manifest(man, out("image.json"));
            if (spec.shape == phantom::Shape::Ellipsoid) {
                auto v = phantom::generate_three_views(spec);
                imgio::write_mask_pgm(v.m_front, out("m_front.pgm"));
                imgio::write_mask_pgm(v.m_right, out("m_right.pgm"));
                imgio::write_mask_pgm(v.m_left, out("m_left.pgm"));
                imgio::write_depth(v.z_front, out("z_front.fgrd"));
                imgio::write_depth(v.z_right, out("z_right.fgrd"));
                imgio::write_depth(v.z_left, out("z_left.fgrd"));
            }
        } else if (sc_ev->parsed()) {
            if (e_weighted && e_kind != "gradient")
                throw CLI::ValidationError(
                    "--weighted needs a reference gradient; only --kind gradient");
            Mask mask = imgio::read_mask_pgm(e_mask);
            Mask scored = erode(mask, e_margin);
            json out;
            out["margin_px"] = e_margin;
            out["masked_pixels"] = scored.count();
            if (e_kind == "gradient") {
                float pitch = kDefaultPitchMm;
                GradientMap truth = imgio::read_gradient(e_truth, &pitch);
                GradientMap pred = imgio::read_gradient(e_pred);
                GradientMap truth_mm = to_millimeters(truth, pitch);
                GradientMap pred_mm = to_millimeters(pred, pitch);
                metrics::RmseOptions opts;
                opts.weighted = e_weighted;
                opts.sigma = static_cast<float>(e_sigma);
                opts.truth_gradient = &truth; // weights use pixel units
                out["metric"] = e_weighted ? "gradient_rmse_weighted" : "gradient_rmse";
                out["value"] = metrics::rmse(pred_mm, truth_mm, scored, opts);
                out["unit"] = "mm/px";
            } else if (e_kind == "depth") {
                float pitch = kDefaultPitchMm;
                DepthMap truth = imgio::read_depth(e_truth, &pitch);
                DepthMap pred = imgio::read_depth(e_pred);
                out["metric"] = "depth_rmse";
                out["value"] = metrics::rmse(to_millimeters(pred, pitch),
                                             to_millimeters(truth, pitch), scored,
                                             metrics::RmseKind::Depth);
                out["unit"] = "mm";
            } else if (e_kind == "period") {
                PeriodMap truth = grid_as_period(imgio::read_grid(e_truth));
                PeriodMap pred = grid_as_period(imgio::read_grid(e_pred));
                out["metric"] = "period_rmse";
                out["value"] =
                    metrics::rmse(pred, truth, scored, metrics::RmseKind::Period);
                out["unit"] = "px";
            } else {
                auto gt = imgio::read_grid(e_truth);
                auto gp = imgio::read_grid(e_pred);
                OrientationField truth(static_cast<int>(gt.width),
                                       static_cast<int>(gt.height));
                OrientationField pred(static_cast<int>(gp.width),
                                      static_cast<int>(gp.height));
                if (gt.channels != 1 || gp.channels != 1)
                    throw TypeMismatchError("orientation fields are 1-channel grids");
                truth.v = gt.data;
                pred.v = gp.data;
                out["metric"] = "orientation_error";
                out["value"] = metrics::orientation_error(pred, truth, scored);
                out["unit"] = "deg";
            }
            std::cout << out.dump() << "\n";
        }
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error(1, stage, e.what());
        return 1;
    } catch (const Error& e) {
        const int code = e.error_class() == ErrorClass::Input ? 2 : 3;
        emit_error(code, stage, std::string(e.name()) + ": " + e.what());
        return code;
    } catch (const std::exception& e) {
        emit_error(2, stage, e.what());
        return 2;
    }
    return 0;
}
