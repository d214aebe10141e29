#include "mmdlp/jobplan.hpp"

#include "mmdlp/error.hpp"
#include "mmdlp/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace mmdlp {

PoolTable pool_table(const Assembly& assembly)
{
    PoolTable t;
    for (const auto& m : assembly.materials)
        t.emplace(m.id, m.pool);
    return t;
}

void ProcessParams::validate(const std::vector<std::string>& materials_used) const
{
    auto bad = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
    if (clean_dwell_ms < 0 || dry_ms < 0 || lift_mm < 0 || xy_travel_s < 0)
        bad("process durations and distances must be >= 0");
    if (first_layer_exposure_ms && *first_layer_exposure_ms <= 0)
        bad("first_layer_exposure_ms must be > 0 when set");
    if (!(z_speed_mm_s > 0))
        bad("z_speed_mm_s must be > 0");
    if (material_order.size() != 2 || material_order[0] == material_order[1])
        bad("material_order must list pools A and B once each");
    for (const auto& m : materials_used) {
        auto it = exposure_ms.find(m);
        if (it == exposure_ms.end() || it->second <= 0)
            bad(fmt::format("material '{}' needs exposure_ms > 0", m));
    }
}

std::string LayerClass::to_string() const
{
    switch (kind) {
    case LayerKind::Empty: return "EMPTY";
    case LayerKind::Single: return fmt::format("SINGLE({})", materials.front());
    case LayerKind::Nested: return fmt::format("NESTED({})", fmt::join(materials, ","));
    }
    return "?";
}

namespace {

std::size_t order_rank(Pool p, const ProcessParams& params)
{
    auto it = std::find(params.material_order.begin(), params.material_order.end(), p);
    return static_cast<std::size_t>(it - params.material_order.begin());
}

} // namespace

LayerClass classify_layer(const LayerMasks& masks, const PoolTable& pools, const ProcessParams& params)
{
    std::vector<std::string> present;
    for (const auto& [id, mask] : masks)
        if (!mask.empty())
            present.push_back(id);

    auto rank = [&](const std::string& id) {
        auto it = pools.find(id);
        return it == pools.end() ? params.material_order.size() + 1 : order_rank(it->second, params);
    };
    std::stable_sort(present.begin(), present.end(),
                     [&](const std::string& a, const std::string& b) { return rank(a) < rank(b); });

    LayerClass c;
    c.kind = present.empty() ? LayerKind::Empty : present.size() == 1 ? LayerKind::Single : LayerKind::Nested;
    c.materials = std::move(present);
    return c;
}

// ---- Overlap -------------------------------------------------------------------

std::string OverlapReport::to_text() const
{
    std::string out = fmt::format("overlap_total_px={}\nflagged_layers={}\n", total_pixels, flagged_layers.size());
    for (const auto& e : entries)
        out += fmt::format("layer {:05} {} {} {}\n", e.layer, e.first, e.second, e.pixels);
    return out;
}

OverlapReport compute_material_overlap(const std::vector<LayerMasks>& stack_masks)
{
    std::vector<std::vector<OverlapEntry>> per_layer(stack_masks.size());
    parallel_for(stack_masks.size(), [&](std::size_t k) {
        const auto& masks = stack_masks[k];
        for (auto a = masks.begin(); a != masks.end(); ++a)
            for (auto b = std::next(a); b != masks.end(); ++b) {
                const std::uint64_t n = overlap_pixels(a->second, b->second);
                if (n > 0)
                    per_layer[k].push_back({k, a->first, b->first, n});
            }
    });
    OverlapReport report;
    for (std::size_t k = 0; k < per_layer.size(); ++k) {
        if (per_layer[k].empty())
            continue;
        report.flagged_layers.push_back(k);
        for (auto& e : per_layer[k]) {
            report.total_pixels += e.pixels;
            report.entries.push_back(std::move(e));
        }
    }
    return report;
}

OverlapReport check_material_overlap(const std::vector<LayerMasks>& stack_masks, std::uint64_t threshold_px)
{
    OverlapReport report = compute_material_overlap(stack_masks);
    if (report.total_pixels > threshold_px) {
        std::string layers;
        const std::size_t shown = std::min<std::size_t>(report.flagged_layers.size(), 20);
        for (std::size_t i = 0; i < shown; ++i)
            layers += (i ? "," : "") + std::to_string(report.flagged_layers[i]);
        if (shown < report.flagged_layers.size())
            layers += ",...";
        throw Error(ErrorCode::OverlapError,
                    fmt::format("{} overlapping pixels (threshold {}) in layers {}", report.total_pixels,
                                threshold_px, layers));
    }
    return report;
}

// ---- Program ----------------------------------------------------------------------

std::string_view to_string(Station s)
{
    switch (s) {
    case Station::A: return "A";
    case Station::B: return "B";
    case Station::Clean: return "CLEAN";
    }
    return "?";
}

Station station_of(Pool p) { return p == Pool::A ? Station::A : Station::B; }

std::int64_t z_to_e4(double z_mm) { return std::llround(z_mm * 1e4); }

namespace {

std::string format_z(std::int64_t z_e4)
{
    const char* sign = z_e4 < 0 ? "-" : "";
    const std::int64_t a = z_e4 < 0 ? -z_e4 : z_e4;
    return fmt::format("{}{}.{:04}", sign, a / 10000, a % 10000);
}

} // namespace

std::string Command::to_line() const
{
    switch (kind) {
    case CommandKind::Home: return "HOME";
    case CommandKind::Pool: return fmt::format("POOL {}", to_string(station));
    case CommandKind::Z: return "Z " + format_z(z_e4);
    case CommandKind::Expose: return fmt::format("EXPOSE {} {} {}", mask_file, material, ms);
    case CommandKind::Clean: return fmt::format("CLEAN {}", ms);
    case CommandKind::Dry: return fmt::format("DRY {}", ms);
    case CommandKind::End: return "END";
    case CommandKind::Unknown: return text;
    }
    return text;
}

std::size_t JobProgram::count(CommandKind kind) const
{
    return static_cast<std::size_t>(
        std::count_if(commands.begin(), commands.end(), [&](const Command& c) { return c.kind == kind; }));
}

JobProgram plan_job(const LayerStack& stack, const std::vector<LayerMasks>& masks, const PoolTable& pools,
                    const ProcessParams& params, const GridSpec& grid)
{
    if (masks.size() != stack.layers.size())
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("{} mask layers for {} stack layers", masks.size(), stack.layers.size()));

    std::vector<LayerClass> classes(masks.size());
    std::set<std::string> used;
    for (std::size_t k = 0; k < masks.size(); ++k) {
        classes[k] = classify_layer(masks[k], pools, params);
        for (const auto& m : classes[k].materials) {
            if (!pools.count(m))
                throw Error(ErrorCode::UnknownMaterial, fmt::format("layer {} material '{}'", k, m));
            used.insert(m);
        }
    }
    params.validate({used.begin(), used.end()});

    JobProgram job;
    job.header.grid = grid;
    job.header.layer_height = stack.layer_height;
    job.header.cleaning_medium = params.cleaning_medium;
    for (const auto& m : used)
        job.header.pools.emplace(m, pools.find(m)->second);

    auto& cmds = job.commands;
    cmds.push_back(Command::home());
    std::optional<Pool> last_pool;
    bool first_nonempty = true;
    for (std::size_t k = 0; k < classes.size(); ++k) {
        cmds.push_back(Command::z_move(z_to_e4(static_cast<double>(k + 1) * stack.layer_height)));
        for (const auto& m : classes[k].materials) {
            const Pool p = pools.find(m)->second;
            if (!last_pool || *last_pool != p) {
                if (last_pool) {
                    cmds.push_back(Command::pool(Station::Clean));
                    cmds.push_back(Command::clean(params.clean_dwell_ms));
                    cmds.push_back(Command::dry(params.dry_ms));
                }
                cmds.push_back(Command::pool(station_of(p)));
                last_pool = p;
            }
            const std::int64_t ms = first_nonempty && params.first_layer_exposure_ms
                                        ? *params.first_layer_exposure_ms
                                        : params.exposure_ms.find(m)->second;
            cmds.push_back(Command::expose("masks/" + mask_filename(k, m), m, ms));
        }
        if (!classes[k].materials.empty())
            first_nonempty = false;
    }
    cmds.push_back(Command::end());
    return job;
}

double estimate_duration(const JobProgram& job, const ProcessParams& params)
{
    double total = 0;
    std::int64_t z = 0;
    for (const auto& c : job.commands) {
        switch (c.kind) {
        case CommandKind::Home: z = 0; break;
        case CommandKind::Pool: total += params.xy_travel_s; break;
        case CommandKind::Z:
            if (c.z_e4 > z) {
                total += static_cast<double>(c.z_e4 - z) / 1e4 / params.z_speed_mm_s;
                z = c.z_e4;
            }
            break;
        case CommandKind::Expose:
            total += static_cast<double>(c.ms) / 1000.0 + 2.0 * params.lift_mm / params.z_speed_mm_s;
            break;
        case CommandKind::Clean:
        case CommandKind::Dry: total += static_cast<double>(c.ms) / 1000.0; break;
        case CommandKind::End:
        case CommandKind::Unknown: break;
        }
    }
    return total;
}

std::string emit_program(const JobProgram& job)
{
    const auto& h = job.header;
    std::string out = "# format=mmdlp-job-1\n";
    out += fmt::format("# grid={}x{}\n", h.grid.width_px, h.grid.height_px);
    out += fmt::format("# pitch_um={}\n", h.grid.pitch_um);
    out += fmt::format("# origin_mm={},{}\n", h.grid.origin_mm.x, h.grid.origin_mm.y);
    out += fmt::format("# layer_height_mm={}\n", h.layer_height);
    for (const auto& [id, pool] : h.pools)
        out += fmt::format("# material.{}={}\n", id, to_string(pool));
    if (!h.cleaning_medium.empty())
        out += fmt::format("# clean_medium={}\n", h.cleaning_medium);
    for (const auto& c : job.commands) {
        out += c.to_line();
        out += '\n';
    }
    return out;
}

namespace {

[[noreturn]] void syntax(std::size_t line, const std::string& msg)
{
    throw Error(ErrorCode::ProgramSyntax, fmt::format("line {}: {}", line, msg));
}

std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r'))
            ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r')
            ++i;
        if (i > start)
            out.push_back(s.substr(start, i - start));
    }
    return out;
}

double to_double(std::string_view tok, std::size_t line)
{
    double v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size() || !std::isfinite(v))
        syntax(line, fmt::format("bad number '{}'", tok));
    return v;
}

std::int64_t to_ms(std::string_view tok, std::size_t line)
{
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size() || v < 0)
        syntax(line, fmt::format("bad duration '{}'", tok));
    return v;
}

void parse_header(JobHeader& h, std::string_view body, std::size_t line)
{
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
        return; // plain comment
    const std::string_view key = body.substr(0, eq);
    const std::string_view value = body.substr(eq + 1);
    if (key == "grid") {
        const auto x = value.find('x');
        if (x == std::string_view::npos)
            syntax(line, "grid must be WxH");
        h.grid.width_px = static_cast<std::uint32_t>(to_double(value.substr(0, x), line));
        h.grid.height_px = static_cast<std::uint32_t>(to_double(value.substr(x + 1), line));
    } else if (key == "pitch_um") {
        h.grid.pitch_um = to_double(value, line);
    } else if (key == "origin_mm") {
        const auto comma = value.find(',');
        if (comma == std::string_view::npos)
            syntax(line, "origin_mm must be x,y");
        h.grid.origin_mm = {to_double(value.substr(0, comma), line), to_double(value.substr(comma + 1), line)};
    } else if (key == "layer_height_mm") {
        h.layer_height = to_double(value, line);
    } else if (key.substr(0, 9) == "material.") {
        if (value == "A")
            h.pools[std::string(key.substr(9))] = Pool::A;
        else if (value == "B")
            h.pools[std::string(key.substr(9))] = Pool::B;
        else
            syntax(line, "material pool must be A or B");
    } else if (key == "clean_medium") {
        h.cleaning_medium = std::string(value);
    }
}

} // namespace

JobProgram parse_program(std::string_view text)
{
    JobProgram job;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos)
            nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty())
            continue;
        if (line.front() == '#') {
            std::string_view body = line.substr(1);
            while (!body.empty() && body.front() == ' ')
                body.remove_prefix(1);
            parse_header(job.header, body, line_no);
            continue;
        }
        const auto tok = split_ws(line);
        if (tok.empty())
            continue;
        auto need = [&](std::size_t n) {
            if (tok.size() != n)
                syntax(line_no, fmt::format("'{}' takes {} argument(s)", tok[0], n - 1));
        };
        Command c;
        if (tok[0] == "HOME") {
            need(1);
            c = Command::home();
        } else if (tok[0] == "END") {
            need(1);
            c = Command::end();
        } else if (tok[0] == "POOL") {
            need(2);
            if (tok[1] == "A")
                c = Command::pool(Station::A);
            else if (tok[1] == "B")
                c = Command::pool(Station::B);
            else if (tok[1] == "CLEAN")
                c = Command::pool(Station::Clean);
            else
                syntax(line_no, fmt::format("unknown pool '{}'", tok[1]));
        } else if (tok[0] == "Z") {
            need(2);
            c = Command::z_move(z_to_e4(to_double(tok[1], line_no)));
        } else if (tok[0] == "EXPOSE") {
            need(4);
            c = Command::expose(std::string(tok[1]), std::string(tok[2]), to_ms(tok[3], line_no));
        } else if (tok[0] == "CLEAN") {
            need(2);
            c = Command::clean(to_ms(tok[1], line_no));
        } else if (tok[0] == "DRY") {
            need(2);
            c = Command::dry(to_ms(tok[1], line_no));
        } else {
            c.kind = CommandKind::Unknown;
            c.text = std::string(line);
        }
        job.commands.push_back(std::move(c));
    }
    return job;
}

} // namespace mmdlp
