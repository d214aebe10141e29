#include "mmdlp/cli.hpp"

#include "mmdlp/error.hpp"
#include "mmdlp/parallel.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>

namespace mmdlp::cli {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, std::string_view text)
{
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw Error(ErrorCode::IoFailure, "cannot write " + p.string());
}

} // namespace

GridSpec grid_for(const Assembly& assembly, const RunConfig& config)
{
    const Box3& bv = assembly.build_volume;
    GridSpec g = centered_grid(config.grid_width_px, config.grid_height_px, config.pitch_um,
                               0.5 * (bv.min.x + bv.max.x), 0.5 * (bv.min.y + bv.max.y));
    g.validate();
    return g;
}

Assembly load_for_run(RunConfig& config)
{
    if (config.manifest.empty())
        throw Error(ErrorCode::InvalidArgument, "no manifest given");
    Assembly a = load_assembly_file(config.manifest);
    if (config.layer_height_mm) {
        if (!(*config.layer_height_mm > 0))
            throw Error(ErrorCode::InvalidArgument, "layer height must be > 0");
        a.layer_height = *config.layer_height_mm;
    }
    for (const auto& m : a.materials)
        config.process.exposure_ms.try_emplace(m.id, config.default_exposure_ms);
    return a;
}

SliceArtifacts slice_stage(const Assembly& assembly, const RunConfig& config)
{
    SliceArtifacts s;
    s.grid = grid_for(assembly, config);
    s.stack = build_layer_stack(assembly);
    s.masks.resize(s.stack.layers.size());
    std::atomic<std::uint64_t> clipped{0};
    parallel_for(s.stack.layers.size(), [&](std::size_t k) {
        for (const auto& slice : s.stack.layers[k].slices) {
            RasterStats st;
            MaskBitmap m = rasterize(slice, s.grid, &st);
            clipped += st.clipped_pixels;
            if (!m.empty())
                s.masks[k].emplace(slice.material, std::move(m));
        }
    });
    s.clipped_pixels = clipped;
    return s;
}

void write_slice_artifacts(const SliceArtifacts& s, const fs::path& out, const PoolTable& pools,
                           const ProcessParams& params)
{
    const fs::path masks = out / "masks";
    fs::create_directories(masks);
    parallel_for(s.masks.size(), [&](std::size_t k) {
        for (const auto& [m, mask] : s.masks[k])
            write_mask(mask, masks / mask_filename(k, m));
    });

    std::string index = fmt::format("# layers={} layer_height_mm={} clipped_pixels={}\n", s.stack.layers.size(),
                                    s.stack.layer_height, s.clipped_pixels);
    index += "# index z_mm class masks...\n";
    for (const auto& layer : s.stack.layers) {
        const LayerClass cls = classify_layer(s.masks[layer.index], pools, params);
        index += fmt::format("{} {:.4f} {}", layer.index, layer.z, cls.to_string());
        for (const auto& m : cls.materials)
            index += " masks/" + mask_filename(layer.index, m);
        index += "\n";
    }
    write_text(out / "layers.txt", index);
}

PlanArtifacts plan_stage(const Assembly& assembly, const SliceArtifacts& slices, const RunConfig& config)
{
    PlanArtifacts p;
    p.overlap = check_material_overlap(slices.masks, config.overlap_threshold_px);
    p.program = plan_job(slices.stack, slices.masks, pool_table(assembly), config.process, slices.grid);
    p.estimated_s = estimate_duration(p.program, config.process);
    return p;
}

std::string plan_summary(const PlanArtifacts& p, const SliceArtifacts& s, const ProcessParams& params)
{
    std::string out = "# plan summary\n";
    out += fmt::format("layers={}\n", s.stack.layers.size());
    out += fmt::format("commands={}\n", p.program.commands.size());
    out += fmt::format("exposures={}\n", p.program.count(CommandKind::Expose));
    out += fmt::format("cleans={}\n", p.program.count(CommandKind::Clean));
    out += fmt::format("estimated_s={:.6f}\n", p.estimated_s);
    out += fmt::format("overlap_pixels={}\n", p.overlap.total_pixels);
    out += "# index class\n";
    for (std::size_t k = 0; k < s.masks.size(); ++k)
        out += fmt::format("{} {}\n", k, classify_layer(s.masks[k], p.program.header.pools, params).to_string());
    return out;
}

PlatabilityArtifacts platability_stage(const Assembly& assembly, const RunConfig& config)
{
    const double voxel = config.voxel_mm ? *config.voxel_mm : assembly.layer_height;
    PlatabilityArtifacts p;
    p.grid = voxelize(assembly, voxel);
    p.report = plating_report(p.grid, flood_void(p.grid));
    return p;
}

namespace {

struct Flags {
    std::string config_path;
    std::string manifest, out, grid, material_order, job;
    double layer_height = 0, pitch_um = 0, voxel = 0, lift = 0, z_speed = 0, xy_travel = 0;
    std::int64_t default_exposure = 0, first_layer = 0, clean_ms = 0, dry_ms = 0;
    std::uint64_t overlap_threshold = 0;
    std::vector<std::string> exposures;
    bool labels = false, no_layer_dump = false;
};

struct Options {
    std::map<std::string, CLI::Option*> by_name;
};

void add_common(CLI::App& app, Flags& f, Options& o)
{
    o.by_name["config"] = app.add_option("--config", f.config_path, "config.json from an earlier run");
    o.by_name["manifest"] = app.add_option("--manifest", f.manifest, "assembly manifest (JSON)");
    o.by_name["out"] = app.add_option("--out", f.out, "output directory");
    o.by_name["layer-height-mm"] = app.add_option("--layer-height-mm", f.layer_height, "override layer height");
    o.by_name["pitch-um"] = app.add_option("--pitch-um", f.pitch_um, "pixel pitch");
    o.by_name["grid"] = app.add_option("--grid", f.grid, "grid size WxH in pixels");
    o.by_name["voxel-mm"] = app.add_option("--voxel-mm", f.voxel, "voxel size for platability");
    o.by_name["material-order"] = app.add_option("--material-order", f.material_order, "pool order, A,B or B,A");
    o.by_name["overlap-threshold-px"] =
        app.add_option("--overlap-threshold-px", f.overlap_threshold, "allowed overlapping pixels");
    o.by_name["exposure-ms"] = app.add_option("--exposure-ms", f.exposures, "per-material exposure, MAT=MS");
    o.by_name["default-exposure-ms"] = app.add_option("--default-exposure-ms", f.default_exposure);
    o.by_name["first-layer-exposure-ms"] = app.add_option("--first-layer-exposure-ms", f.first_layer);
    o.by_name["clean-ms"] = app.add_option("--clean-ms", f.clean_ms);
    o.by_name["dry-ms"] = app.add_option("--dry-ms", f.dry_ms);
    o.by_name["lift-mm"] = app.add_option("--lift-mm", f.lift);
    o.by_name["z-speed-mm-s"] = app.add_option("--z-speed-mm-s", f.z_speed);
    o.by_name["xy-travel-s"] = app.add_option("--xy-travel-s", f.xy_travel);
    o.by_name["labels"] = app.add_flag("--labels", f.labels, "also write labels.bin");
    o.by_name["no-layer-dump"] = app.add_flag("--no-layer-dump", f.no_layer_dump);
}

bool given(const Options& o, const char* name) { return o.by_name.at(name)->count() > 0; }

RunConfig resolve(const Flags& f, const Options& o)
{
    RunConfig c;
    if (given(o, "config"))
        c = config_from_json(read_text(f.config_path));
    if (given(o, "manifest"))
        c.manifest = f.manifest;
    if (given(o, "out"))
        c.out = f.out;
    if (given(o, "layer-height-mm"))
        c.layer_height_mm = f.layer_height;
    if (given(o, "pitch-um"))
        c.pitch_um = f.pitch_um;
    if (given(o, "grid")) {
        unsigned w = 0, h = 0;
        char x = 0, extra = 0;
        if (std::sscanf(f.grid.c_str(), "%u%c%u%c", &w, &x, &h, &extra) != 3 || (x != 'x' && x != 'X'))
            throw Error(ErrorCode::InvalidArgument, "--grid expects WxH, got '" + f.grid + "'");
        c.grid_width_px = w;
        c.grid_height_px = h;
    }
    if (given(o, "voxel-mm"))
        c.voxel_mm = f.voxel;
    if (given(o, "material-order")) {
        if (f.material_order == "A,B")
            c.process.material_order = {Pool::A, Pool::B};
        else if (f.material_order == "B,A")
            c.process.material_order = {Pool::B, Pool::A};
        else
            throw Error(ErrorCode::InvalidArgument, "--material-order expects A,B or B,A");
    }
    if (given(o, "overlap-threshold-px"))
        c.overlap_threshold_px = f.overlap_threshold;
    if (given(o, "default-exposure-ms"))
        c.default_exposure_ms = f.default_exposure;
    for (const auto& e : f.exposures) {
        const auto eq = e.find('=');
        if (eq == std::string::npos || eq == 0)
            throw Error(ErrorCode::InvalidArgument, "--exposure-ms expects MAT=MS, got '" + e + "'");
        try {
            c.process.exposure_ms[e.substr(0, eq)] = std::stoll(e.substr(eq + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidArgument, "--exposure-ms expects MAT=MS, got '" + e + "'");
        }
    }
    if (given(o, "first-layer-exposure-ms"))
        c.process.first_layer_exposure_ms = f.first_layer;
    if (given(o, "clean-ms"))
        c.process.clean_dwell_ms = f.clean_ms;
    if (given(o, "dry-ms"))
        c.process.dry_ms = f.dry_ms;
    if (given(o, "lift-mm"))
        c.process.lift_mm = f.lift;
    if (given(o, "z-speed-mm-s"))
        c.process.z_speed_mm_s = f.z_speed;
    if (given(o, "xy-travel-s"))
        c.process.xy_travel_s = f.xy_travel;
    if (f.labels)
        c.write_labels = true;
    if (f.no_layer_dump)
        c.write_layer_dump = false;
    return c;
}

void report_warnings(const Assembly& a, std::ostream& err)
{
    for (const auto& w : a.warnings)
        err << "warning: " << w << "\n";
}

void do_slice(RunConfig& c, std::ostream& out, std::ostream& err)
{
    const Assembly a = load_for_run(c);
    report_warnings(a, err);
    const fs::path dir = c.out;
    fs::create_directories(dir);
    write_text(dir / "config.json", config_to_json(c));
    const SliceArtifacts s = slice_stage(a, c);
    write_slice_artifacts(s, dir, pool_table(a), c.process);
    if (c.write_layer_dump)
        write_layer_dump(s.stack, dir / "layers");
    if (s.clipped_pixels)
        err << "warning: " << s.clipped_pixels << " pixels fall outside the grid\n";
    out << fmt::format("sliced {} layers into {}\n", s.stack.layers.size(), dir.string());
}

void do_plan(RunConfig& c, std::ostream& out, std::ostream& err, bool simulate, bool platability)
{
    const Assembly a = load_for_run(c);
    report_warnings(a, err);
    const fs::path dir = c.out;
    fs::create_directories(dir);
    write_text(dir / "config.json", config_to_json(c));

    const SliceArtifacts s = slice_stage(a, c);
    write_slice_artifacts(s, dir, pool_table(a), c.process);
    if (c.write_layer_dump)
        write_layer_dump(s.stack, dir / "layers");
    if (s.clipped_pixels)
        err << "warning: " << s.clipped_pixels << " pixels fall outside the grid\n";

    const PlanArtifacts p = plan_stage(a, s, c);
    write_text(dir / "overlap.txt", p.overlap.to_text());
    write_text(dir / "job.txt", emit_program(p.program));
    write_text(dir / "plan_summary.txt", plan_summary(p, s, c.process));
    out << fmt::format("planned {} commands, {} cleans, estimated {:.1f} s\n", p.program.commands.size(),
                       p.program.count(CommandKind::Clean), p.estimated_s);

    if (simulate) {
        try {
            const SimTrace t = execute(p.program, c.process);
            write_text(dir / "trace.txt", format_trace(t));
            out << fmt::format("simulated {:.1f} s\n", t.total_duration);
        } catch (const SimulationError& e) {
            write_text(dir / "trace.txt", format_trace(e.partial_trace()) + "error: " + e.what() + "\n");
            throw;
        }
    }
    if (platability) {
        const PlatabilityArtifacts pl = platability_stage(a, c);
        for (const auto& w : pl.grid.warnings)
            err << "warning: " << w << "\n";
        write_text(dir / "plating_report.txt", format_report(pl.report, pl.grid));
        if (c.write_labels)
            write_label_dump(pl.grid, dir / "labels.bin");
        out << fmt::format("plated area {:.4f} mm2 in {} patches\n", pl.report.plated_area_total,
                           pl.report.patches.size());
    }
}

void do_simulate(RunConfig& c, const std::string& job_path, std::ostream& out)
{
    const JobProgram program = parse_program(read_text(job_path));
    for (const auto& [m, pool] : program.header.pools)
        c.process.exposure_ms.try_emplace(m, c.default_exposure_ms);
    const fs::path dir = c.out;
    fs::create_directories(dir);
    try {
        const SimTrace t = execute(program, c.process);
        write_text(dir / "trace.txt", format_trace(t));
        out << fmt::format("ok: {} commands, {:.3f} s, {} cleans\n", t.events.size(), t.total_duration,
                           t.clean_count());
    } catch (const SimulationError& e) {
        write_text(dir / "trace.txt", format_trace(e.partial_trace()) + "error: " + e.what() + "\n");
        throw;
    }
}

void do_platability(RunConfig& c, std::ostream& out, std::ostream& err)
{
    const Assembly a = load_for_run(c);
    report_warnings(a, err);
    const fs::path dir = c.out;
    fs::create_directories(dir);
    write_text(dir / "config.json", config_to_json(c));
    const PlatabilityArtifacts pl = platability_stage(a, c);
    for (const auto& w : pl.grid.warnings)
        err << "warning: " << w << "\n";
    write_text(dir / "plating_report.txt", format_report(pl.report, pl.grid));
    if (c.write_labels)
        write_label_dump(pl.grid, dir / "labels.bin");
    out << fmt::format("plated area {:.4f} mm2 in {} patches, buried volume {:.4f} mm3\n",
                       pl.report.plated_area_total, pl.report.patches.size(), pl.report.buried_precursor_volume);
}

int exit_code(ErrorCode code) { return code == ErrorCode::SimulationViolation ? 3 : 2; }

} // namespace

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"multi-material DLP slicing, job planning and plating prediction", "mmdlp"};
    app.require_subcommand(1);
    Flags f;
    Options slice_o, plan_o, run_o, sim_o, plat_o;
    std::string demo_dir = "demo";

    auto* slice = app.add_subcommand("slice", "slice and rasterize an assembly");
    add_common(*slice, f, slice_o);
    auto* plan = app.add_subcommand("plan", "slice, check overlap and write job.txt");
    add_common(*plan, f, plan_o);
    auto* run = app.add_subcommand("run", "plan, simulate and predict plating");
    add_common(*run, f, run_o);
    auto* sim = app.add_subcommand("simulate", "execute a job program on the virtual machine");
    add_common(*sim, f, sim_o);
    sim->add_option("--job", f.job, "job.txt")->required();
    auto* plat = app.add_subcommand("platability", "voxelize and report plated surfaces");
    add_common(*plat, f, plat_o);
    auto* demo = app.add_subcommand("demo", "write demo assemblies");
    demo->add_option("--out", demo_dir, "output directory");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(std::move(rev));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*demo) {
            for (const auto& p : write_demo(demo_dir))
                out << p.string() << "\n";
        } else if (*slice) {
            RunConfig c = resolve(f, slice_o);
            do_slice(c, out, err);
        } else if (*plan) {
            RunConfig c = resolve(f, plan_o);
            do_plan(c, out, err, false, false);
        } else if (*run) {
            RunConfig c = resolve(f, run_o);
            do_plan(c, out, err, true, true);
        } else if (*sim) {
            RunConfig c = resolve(f, sim_o);
            do_simulate(c, f.job, out);
        } else if (*plat) {
            RunConfig c = resolve(f, plat_o);
            do_platability(c, out, err);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run_main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_main(args, std::cout, std::cerr);
}

} // namespace mmdlp::cli
