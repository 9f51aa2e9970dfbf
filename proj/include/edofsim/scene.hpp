// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#ifndef EDOFSIM_SCENE_HPP
#define EDOFSIM_SCENE_HPP

#include "edofsim/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace edofsim
{
    // Shapes are closed sets: a lattice center lying on a boundary counts as inside.
    struct Disk
    {
        Point center;
        double radius = 0.0;
    };

    struct Rect
    {
        Point center;
        double width = 0.0;
        double height = 0.0;
    };

    // Vertical sheet at x = `x`, centered on y = 0, with a centered opening of `aperture`.
    struct SheetWithAperture
    {
        double x = 0.0;
        double total_height = 0.0;
        double thickness = 0.0;
        double aperture = 0.0;
    };

    // Square ring of walls centered on the origin; `inner_side` is the free interior width.
    struct CavityWalls
    {
        double inner_side = 0.0;
        double thickness = 0.0;
    };

    using Shape = std::variant<Disk, Rect, SheetWithAperture, CavityWalls>;

    bool contains(const Shape &shape, Point p);
    BoundingBox bounds(const Shape &shape);
    void validate(const Shape &shape); // throws std::invalid_argument

    struct Region
    {
        Shape shape;
        cplx eps_r;
    };

    // Ordered list of material regions; later regions override earlier ones on overlap.
    class Scene
    {
    public:
        Scene() = default;

        // Throws std::invalid_argument for eps_r == 1, Im(eps_r) > 0 or a malformed shape.
        Scene &add(Shape shape, cplx eps_r);

        const std::vector<Region> &regions() const { return regions_; }
        bool empty() const { return regions_.empty(); }
        BoundingBox bounds() const;

        // Permittivity at p following last-region-wins, or nullopt for background.
        std::optional<cplx> permittivity_at(Point p) const;

        // Stable textual description (used for provenance hashing and config round trips).
        std::string describe() const;
        std::uint64_t hash() const;

    private:
        std::vector<Region> regions_;
    };

    struct Cell
    {
        int i = 0; // lattice column
        int j = 0; // lattice row
        Point center;
        cplx eps_r;
    };

    // Uniform lattice plus the list of occupied (non-background) cells.
    class Grid
    {
    public:
        Grid() = default;
        Grid(double delta, Point origin, int nx, int ny, std::vector<Cell> cells);

        double delta() const { return delta_; }
        Point origin() const { return origin_; }
        int nx() const { return nx_; }
        int ny() const { return ny_; }
        const std::vector<Cell> &cells() const { return cells_; }
        std::size_t size() const { return cells_.size(); }
        bool empty() const { return cells_.empty(); }

        // Radius of the circle with the same area as one cell.
        double equivalent_radius() const;

        Point center(int i, int j) const;

        // Index into cells() of the occupied cell containing p, if any.
        std::optional<std::size_t> cell_at(Point p) const;

    private:
        double delta_ = 0.1;
        Point origin_;
        int nx_ = 0;
        int ny_ = 0;
        std::vector<Cell> cells_;
        std::vector<int> lattice_; // nx*ny, -1 for background, column-major in i
    };

    // Lattice origin is the lower-left corner of the scene bounding box, so axis-aligned
    // edges lying a whole number of cells from it fall exactly on cell boundaries.
    Grid rasterize(const Scene &scene, int cells_per_lambda0);

    // ----- Presets ----------------------------------------------------------

    inline constexpr cplx kCopperEpsR{1.0, -1.044e8};
    inline constexpr cplx kSurrogateMetalEpsR{1.0, -1.0e4};

    enum class MetalContrast
    {
        Full,     // copper at 10 GHz
        Surrogate // 1 - 1e4 j
    };

    cplx metal_eps(MetalContrast mode);

    using PresetParams = std::map<std::string, double>;

    // Defaults and accepted keys of a preset, including the array keys L and D.
    PresetParams preset_defaults(const std::string &name);
    std::vector<std::string> preset_names();

    // keyhole:        S, height, thickness, L, D
    // twin_cylinders: R, eps_r, L, D
    // cavity:         Sc, side, thickness, L, D
    // Unknown keys, overlapping the array lines and malformed values are rejected.
    Scene preset_scene(const std::string &name, const PresetParams &params, MetalContrast metal = MetalContrast::Full);

} // namespace edofsim

#endif
