#pragma once

#include "mmdlp/raster.hpp"
#include "mmdlp/slicing.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmdlp {

using PoolTable = std::map<std::string, Pool, std::less<>>;

PoolTable pool_table(const Assembly& assembly);

// ---- Process parameters ------------------------------------------------------

struct ProcessParams {
    std::map<std::string, std::int64_t, std::less<>> exposure_ms;
    std::optional<std::int64_t> first_layer_exposure_ms; // applies to the first non-empty layer
    std::int64_t clean_dwell_ms = 0;
    std::int64_t dry_ms = 0;
    double lift_mm = 0;
    double z_speed_mm_s = 1;
    double xy_travel_s = 0; // per POOL move
    std::vector<Pool> material_order{Pool::A, Pool::B};
    std::string cleaning_medium = "40% ethanol, 50% acetone, 10% dilute H2SO4 (40 wt%) by volume";

    // Throws InvalidArgument on negative durations, a non-positive z speed, or a
    // used material without a positive exposure.
    void validate(const std::vector<std::string>& materials_used) const;
};

// ---- Layer classification -----------------------------------------------------

enum class LayerKind { Empty, Single, Nested };

struct LayerClass {
    LayerKind kind = LayerKind::Empty;
    std::vector<std::string> materials; // exposure order

    std::string to_string() const; // EMPTY, SINGLE(a), NESTED(a,b)
    friend bool operator==(const LayerClass&, const LayerClass&) = default;
};

// Masks of one layer, keyed by material id.
using LayerMasks = std::map<std::string, MaskBitmap, std::less<>>;

// Orders nonempty materials by the position of their pool in material_order,
// then by id.
LayerClass classify_layer(const LayerMasks& masks, const PoolTable& pools, const ProcessParams& params);

// ---- Overlap -----------------------------------------------------------------

struct OverlapEntry {
    std::size_t layer = 0;
    std::string first, second;
    std::uint64_t pixels = 0;
};

struct OverlapReport {
    std::vector<OverlapEntry> entries; // only pairs with pixels > 0
    std::uint64_t total_pixels = 0;
    std::vector<std::size_t> flagged_layers;

    std::string to_text() const;
};

OverlapReport compute_material_overlap(const std::vector<LayerMasks>& stack_masks);

// As compute_material_overlap, but throws OverlapError (naming the layers)
// when total overlapping pixels exceed threshold_px.
OverlapReport check_material_overlap(const std::vector<LayerMasks>& stack_masks, std::uint64_t threshold_px = 0);

// ---- Job program ----------------------------------------------------------------

enum class Station { A, B, Clean };

std::string_view to_string(Station s);
Station station_of(Pool p);

enum class CommandKind { Home, Pool, Z, Expose, Clean, Dry, End, Unknown };

struct Command {
    CommandKind kind = CommandKind::Home;
    Station station = Station::A;  // POOL
    std::int64_t z_e4 = 0;         // Z, in units of 0.1 um (four decimals of mm)
    std::string mask_file;         // EXPOSE
    std::string material;          // EXPOSE
    std::int64_t ms = 0;           // EXPOSE, CLEAN, DRY
    std::string text;              // Unknown: the raw line

    static Command home() { return {}; }
    static Command end() { return of(CommandKind::End); }
    static Command pool(Station s)
    {
        Command c = of(CommandKind::Pool);
        c.station = s;
        return c;
    }
    static Command z_move(std::int64_t z_e4)
    {
        Command c = of(CommandKind::Z);
        c.z_e4 = z_e4;
        return c;
    }
    static Command expose(std::string mask, std::string material, std::int64_t ms)
    {
        Command c = of(CommandKind::Expose);
        c.mask_file = std::move(mask);
        c.material = std::move(material);
        c.ms = ms;
        return c;
    }
    static Command clean(std::int64_t ms) { return timed(CommandKind::Clean, ms); }
    static Command dry(std::int64_t ms) { return timed(CommandKind::Dry, ms); }

    std::string to_line() const;
    friend bool operator==(const Command&, const Command&) = default;

private:
    static Command of(CommandKind k)
    {
        Command c;
        c.kind = k;
        return c;
    }
    static Command timed(CommandKind k, std::int64_t ms)
    {
        Command c = of(k);
        c.ms = ms;
        return c;
    }
};

std::int64_t z_to_e4(double z_mm);

struct JobHeader {
    GridSpec grid;
    double layer_height = 0;
    PoolTable pools;
    std::string cleaning_medium;
};

struct JobProgram {
    JobHeader header;
    std::vector<Command> commands;

    std::size_t count(CommandKind kind) const;
};

// Compiles the stack into commands. Per layer k: Z to (k+1) * layer_height,
// then each nonempty material in classify_layer order. A pool change relative
// to the previous exposure (within or across layers) is preceded by
// POOL CLEAN, CLEAN, DRY; consecutive same-pool exposures never get a clean.
JobProgram plan_job(const LayerStack& stack, const std::vector<LayerMasks>& masks, const PoolTable& pools,
                    const ProcessParams& params, const GridSpec& grid);

// Seconds: exposures, cleans, dries, Z travel (including a lift and return
// per exposure) and xy_travel_s per POOL move.
double estimate_duration(const JobProgram& job, const ProcessParams& params);

std::string emit_program(const JobProgram& job);

// Unknown command words parse into CommandKind::Unknown (the simulator
// rejects them); malformed arguments of known commands throw ProgramSyntax.
JobProgram parse_program(std::string_view text);

} // namespace mmdlp
