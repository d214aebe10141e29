#include "mmdlp/cli.hpp"

#include "mmdlp/error.hpp"

#include <json.hpp>

namespace mmdlp::cli {

using nlohmann::json;

ProcessParams RunConfig::default_process()
{
    ProcessParams p;
    p.clean_dwell_ms = 20000;
    p.dry_ms = 10000;
    p.lift_mm = 5;
    p.z_speed_mm_s = 2;
    p.xy_travel_s = 3;
    return p;
}

namespace {

std::string pool_name(Pool p) { return std::string(to_string(p)); }

Pool parse_pool(const std::string& s)
{
    if (s == "A")
        return Pool::A;
    if (s == "B")
        return Pool::B;
    throw Error(ErrorCode::InvalidArgument, "pool must be A or B, got '" + s + "'");
}

} // namespace

std::string config_to_json(const RunConfig& c)
{
    json j;
    j["manifest"] = c.manifest;
    j["out"] = c.out;
    j["layer_height_mm"] = c.layer_height_mm ? json(*c.layer_height_mm) : json(nullptr);
    j["grid"] = {{"width_px", c.grid_width_px}, {"height_px", c.grid_height_px}, {"pitch_um", c.pitch_um}};
    j["voxel_mm"] = c.voxel_mm ? json(*c.voxel_mm) : json(nullptr);
    j["overlap_threshold_px"] = c.overlap_threshold_px;
    j["default_exposure_ms"] = c.default_exposure_ms;
    j["write_labels"] = c.write_labels;
    j["write_layer_dump"] = c.write_layer_dump;

    const ProcessParams& p = c.process;
    json proc;
    proc["exposure_ms"] = json::object();
    for (const auto& [m, ms] : p.exposure_ms)
        proc["exposure_ms"][m] = ms;
    proc["first_layer_exposure_ms"] = p.first_layer_exposure_ms ? json(*p.first_layer_exposure_ms) : json(nullptr);
    proc["clean_dwell_ms"] = p.clean_dwell_ms;
    proc["dry_ms"] = p.dry_ms;
    proc["lift_mm"] = p.lift_mm;
    proc["z_speed_mm_s"] = p.z_speed_mm_s;
    proc["xy_travel_s"] = p.xy_travel_s;
    proc["material_order"] = json::array();
    for (Pool pool : p.material_order)
        proc["material_order"].push_back(pool_name(pool));
    proc["cleaning_medium"] = p.cleaning_medium;
    j["process"] = proc;
    return j.dump(2) + "\n";
}

RunConfig config_from_json(std::string_view text)
{
    try {
        const json j = json::parse(text);
        RunConfig c;
        c.manifest = j.value("manifest", c.manifest);
        c.out = j.value("out", c.out);
        if (j.contains("layer_height_mm") && !j["layer_height_mm"].is_null())
            c.layer_height_mm = j["layer_height_mm"].get<double>();
        if (j.contains("grid")) {
            const json& g = j["grid"];
            c.grid_width_px = g.value("width_px", c.grid_width_px);
            c.grid_height_px = g.value("height_px", c.grid_height_px);
            c.pitch_um = g.value("pitch_um", c.pitch_um);
        }
        if (j.contains("voxel_mm") && !j["voxel_mm"].is_null())
            c.voxel_mm = j["voxel_mm"].get<double>();
        c.overlap_threshold_px = j.value("overlap_threshold_px", c.overlap_threshold_px);
        c.default_exposure_ms = j.value("default_exposure_ms", c.default_exposure_ms);
        c.write_labels = j.value("write_labels", c.write_labels);
        c.write_layer_dump = j.value("write_layer_dump", c.write_layer_dump);
        if (j.contains("process")) {
            const json& p = j["process"];
            ProcessParams& pp = c.process;
            if (p.contains("exposure_ms"))
                for (const auto& [m, ms] : p["exposure_ms"].items())
                    pp.exposure_ms[m] = ms.get<std::int64_t>();
            if (p.contains("first_layer_exposure_ms") && !p["first_layer_exposure_ms"].is_null())
                pp.first_layer_exposure_ms = p["first_layer_exposure_ms"].get<std::int64_t>();
            pp.clean_dwell_ms = p.value("clean_dwell_ms", pp.clean_dwell_ms);
            pp.dry_ms = p.value("dry_ms", pp.dry_ms);
            pp.lift_mm = p.value("lift_mm", pp.lift_mm);
            pp.z_speed_mm_s = p.value("z_speed_mm_s", pp.z_speed_mm_s);
            pp.xy_travel_s = p.value("xy_travel_s", pp.xy_travel_s);
            if (p.contains("material_order")) {
                pp.material_order.clear();
                for (const auto& s : p["material_order"])
                    pp.material_order.push_back(parse_pool(s.get<std::string>()));
            }
            pp.cleaning_medium = p.value("cleaning_medium", pp.cleaning_medium);
        }
        return c;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
    }
}

} // namespace mmdlp::cli
