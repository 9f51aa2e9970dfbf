// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#ifndef EDOFSIM_SCENARIOS_HPP
#define EDOFSIM_SCENARIOS_HPP

#include "edofsim/channel.hpp"
#include "edofsim/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace edofsim
{
    struct SweepAxis
    {
        std::string parameter;
        std::vector<double> values;
    };

    // Declarative scenario description. Text form (schema 1):
    //
    //   schema = 1
    //   name = fig5b
    //   [scene]
    //   preset = twin_cylinders
    //   R = 2.4
    //   eps_r = 3
    //   [arrays]
    //   L = 2
    //   D = 10
    //   [solver]
    //   cells_per_wavelength = 10
    //   method = auto          # auto | dense | cgfft
    //   krylov = cgnr          # cgnr | bicgstab
    //   tol = 1e-6
    //   max_iter = 0
    //   metal = full           # full | surrogate
    //   threads = 1
    //   [sweep]
    //   R = 1.2:2.4:0.4        # start:stop:step
    //   eps_r = 2, 3, 4, 5, 6  # explicit list
    //   [output]
    //   dir = out/fig5b
    //   correlation_sources = 2, 3
    //   fieldmap_sources = 2, 3
    //   profile_step = 0.05
    //   normalization = unit_peak
    //
    // Sweep axes combine as a cartesian product, first axis outermost.
    //
    // A custom scene replaces the preset with region lines (later wins on overlap):
    //
    //   [scene]
    //   preset = custom
    //   region = disk <cx> <cy> <radius> <eps_re> <eps_im>
    //   region = rect <cx> <cy> <width> <height> <eps_re> <eps_im>
    //   region = sheet <x> <height> <thickness> <aperture> <eps_re> <eps_im>
    //   region = cavity <inner_side> <thickness> <eps_re> <eps_im>
    struct ScenarioConfig
    {
        int schema = 1;
        std::string name = "scenario";
        std::string preset;  // preset name, or "custom" with explicit regions
        PresetParams params; // preset parameters including L and D
        std::optional<Scene> custom_scene;
        int cells_per_lambda0 = 10;
        SolverSettings solver;
        MetalContrast metal = MetalContrast::Full;
        unsigned threads = 1;
        std::vector<SweepAxis> sweep;
        std::filesystem::path output_dir = "out";
        std::optional<std::pair<std::size_t, std::size_t>> correlation_sources;
        std::vector<std::size_t> fieldmap_sources;
        double profile_step = 0.05;
        FieldNormalization normalization = FieldNormalization::UnitPeak;

        std::size_t point_count() const;
        // Parameters of sweep point k (row-major over axes).
        PresetParams point_params(std::size_t k) const;
    };

    class ConfigError : public std::runtime_error
    {
    public:
        ConfigError(const std::string &what, int line = 0);
        int line() const { return line_; }

    private:
        int line_;
    };

    ScenarioConfig parse_config(std::istream &is);
    ScenarioConfig load_config(const std::filesystem::path &path);
    void write_config(std::ostream &os, const ScenarioConfig &cfg);
    void validate(const ScenarioConfig &cfg); // throws ConfigError

    // Built-in configurations pinning the published experiments.
    std::vector<std::string> builtin_config_names();
    ScenarioConfig builtin_config(const std::string &name);
    std::string builtin_config_description(const std::string &name);

    // Arrays for a parameter set: tx at x = -D/2, rx at x = +D/2, both vertical, length L.
    ArrayGeometry tx_array(const PresetParams &p);
    ArrayGeometry rx_array(const PresetParams &p);

    // Receiving-line sample points spaced `step`, endpoints included.
    std::vector<Point> receiving_line(const PresetParams &p, double step);

    struct SweepPoint
    {
        std::size_t index = 0;
        PresetParams params;
        bool ok = false;
        std::string status = "pending";
        std::size_t unknowns = 0;
        double edof = 0.0;
        std::vector<double> eigenvalues; // descending
        std::optional<double> field_correlation;
        double seconds = 0.0;
        std::optional<ChannelMatrix> channel;
    };

    struct ScenarioResult
    {
        ScenarioConfig config;
        std::vector<SweepPoint> points;
        bool all_ok() const;
    };

    struct RunOptions
    {
        bool write_files = true;
        bool keep_channels = false;
        std::ostream *log = nullptr;
    };

    // Runs every sweep point: preset scene -> rasterize -> channel -> correlation -> EDOF.
    // With write_files, emits sweep.csv, eigenvalues/, channels/, diagnostics.csv and the
    // configured field maps under config.output_dir. Failed points keep their status.
    ScenarioResult run_scenario(const ScenarioConfig &config, const RunOptions &options = {});

    // Rectangular sampling window; points at origin + (i*step, j*step), both ends included.
    struct FieldWindow
    {
        Point lower;
        Point upper;
        double step = 0.05;
    };

    struct FieldMap
    {
        Point origin;
        double delta = 0.0;
        int nx = 0;
        int ny = 0;
        std::vector<cplx> values; // i + nx * j, NaN inside scatterers
        bool normalized = false;

        cplx at(int i, int j) const { return values[static_cast<std::size_t>(i + nx * j)]; }
    };

    enum class FieldMapKind
    {
        Window,
        ReceivingLine
    };

    struct FieldMapRequest
    {
        std::size_t source = 0;
        FieldMapKind kind = FieldMapKind::ReceivingLine;
        FieldWindow window;
        bool normalize = false;
    };

    // Scene for one parameter set (preset or custom).
    Scene build_scene(const ScenarioConfig &config, const PresetParams &params);

    FieldMap emit_fieldmap(const ScenarioConfig &config, const PresetParams &params, const FieldMapRequest &request);
    // Same, reusing a prepared engine for the scene's grid.
    FieldMap emit_fieldmap(const FieldEngine &engine, const PresetParams &params, const FieldMapRequest &request);

    void write_fieldmap_csv(std::ostream &os, const FieldMap &map);
    FieldMap read_fieldmap_csv(std::istream &is);

    void write_sweep_csv(std::ostream &os, const ScenarioResult &result, bool include_timing = true);

} // namespace edofsim

#endif
