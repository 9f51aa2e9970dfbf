// SPDX-License-Identifier: Apache-2.0
//
// edof-sim: full-wave channel and degrees-of-freedom simulator for 2-D MIMO links
// ------------------------------------------------------------------------

#include "edofsim/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace edofsim
{
    namespace
    {
        constexpr double kTol = 1e-9;

        template <class... Ts>
        struct overloaded : Ts...
        {
            using Ts::operator()...;
        };

        std::string num(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }

        void require_positive(double v, const char *what)
        {
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument(std::string(what) + " must be positive and finite");
        }
    } // namespace

    bool contains(const Shape &shape, Point p)
    {
        return std::visit(overloaded{
                              [&](const Disk &d) {
                                  const double r = d.radius + kTol;
                                  const double dx = p.x - d.center.x, dy = p.y - d.center.y;
                                  return dx * dx + dy * dy <= r * r;
                              },
                              [&](const Rect &r) {
                                  return std::abs(p.x - r.center.x) <= 0.5 * r.width + kTol &&
                                         std::abs(p.y - r.center.y) <= 0.5 * r.height + kTol;
                              },
                              [&](const SheetWithAperture &s) {
                                  const double ay = std::abs(p.y);
                                  return std::abs(p.x - s.x) <= 0.5 * s.thickness + kTol &&
                                         ay <= 0.5 * s.total_height + kTol && ay >= 0.5 * s.aperture - kTol;
                              },
                              [&](const CavityWalls &c) {
                                  const double m = std::max(std::abs(p.x), std::abs(p.y));
                                  return m <= 0.5 * c.inner_side + c.thickness + kTol && m >= 0.5 * c.inner_side - kTol;
                              },
                          },
                          shape);
    }

    BoundingBox bounds(const Shape &shape)
    {
        return std::visit(overloaded{
                              [](const Disk &d) {
                                  return BoundingBox{{d.center.x - d.radius, d.center.y - d.radius},
                                                     {d.center.x + d.radius, d.center.y + d.radius}};
                              },
                              [](const Rect &r) {
                                  return BoundingBox{{r.center.x - 0.5 * r.width, r.center.y - 0.5 * r.height},
                                                     {r.center.x + 0.5 * r.width, r.center.y + 0.5 * r.height}};
                              },
                              [](const SheetWithAperture &s) {
                                  return BoundingBox{{s.x - 0.5 * s.thickness, -0.5 * s.total_height},
                                                     {s.x + 0.5 * s.thickness, 0.5 * s.total_height}};
                              },
                              [](const CavityWalls &c) {
                                  const double h = 0.5 * c.inner_side + c.thickness;
                                  return BoundingBox{{-h, -h}, {h, h}};
                              },
                          },
                          shape);
    }

    void validate(const Shape &shape)
    {
        std::visit(overloaded{
                       [](const Disk &d) { require_positive(d.radius, "disk radius"); },
                       [](const Rect &r) {
                           require_positive(r.width, "rect width");
                           require_positive(r.height, "rect height");
                       },
                       [](const SheetWithAperture &s) {
                           require_positive(s.total_height, "sheet height");
                           require_positive(s.thickness, "sheet thickness");
                           if (!(s.aperture >= 0.0) || !(s.aperture < s.total_height))
                               throw std::invalid_argument("sheet aperture must satisfy 0 <= aperture < height");
                       },
                       [](const CavityWalls &c) {
                           require_positive(c.inner_side, "cavity inner side");
                           require_positive(c.thickness, "cavity wall thickness");
                       },
                   },
                   shape);
    }

    // ----- Scene -----------------------------------------------------------

    Scene &Scene::add(Shape shape, cplx eps_r)
    {
        validate(shape);
        if (eps_r == cplx{1.0, 0.0})
            throw std::invalid_argument("region with eps_r = 1 carries no contrast");
        if (eps_r.imag() > 0.0)
            throw std::invalid_argument("region eps_r must have Im(eps_r) <= 0 (passive media)");
        if (!std::isfinite(eps_r.real()) || !std::isfinite(eps_r.imag()))
            throw std::invalid_argument("region eps_r must be finite");
        regions_.push_back({std::move(shape), eps_r});
        return *this;
    }

    BoundingBox Scene::bounds() const
    {
        if (regions_.empty())
            return {};
        BoundingBox box = edofsim::bounds(regions_.front().shape);
        for (const auto &r : regions_)
        {
            const BoundingBox b = edofsim::bounds(r.shape);
            box.min.x = std::min(box.min.x, b.min.x);
            box.min.y = std::min(box.min.y, b.min.y);
            box.max.x = std::max(box.max.x, b.max.x);
            box.max.y = std::max(box.max.y, b.max.y);
        }
        return box;
    }

    std::optional<cplx> Scene::permittivity_at(Point p) const
    {
        for (auto it = regions_.rbegin(); it != regions_.rend(); ++it)
            if (contains(it->shape, p))
                return it->eps_r;
        return std::nullopt;
    }

    std::string Scene::describe() const
    {
        std::ostringstream os;
        for (const auto &r : regions_)
        {
            os << std::visit(overloaded{
                                 [](const Disk &d) {
                                     return "disk " + num(d.center.x) + " " + num(d.center.y) + " " + num(d.radius);
                                 },
                                 [](const Rect &q) {
                                     return "rect " + num(q.center.x) + " " + num(q.center.y) + " " + num(q.width) + " " +
                                            num(q.height);
                                 },
                                 [](const SheetWithAperture &s) {
                                     return "sheet " + num(s.x) + " " + num(s.total_height) + " " + num(s.thickness) + " " +
                                            num(s.aperture);
                                 },
                                 [](const CavityWalls &c) {
                                     return "cavity " + num(c.inner_side) + " " + num(c.thickness);
                                 },
                             },
                             r.shape);
            os << " " << num(r.eps_r.real()) << " " << num(r.eps_r.imag()) << "\n";
        }
        return os.str();
    }

    std::uint64_t Scene::hash() const
    {
        // FNV-1a
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char c : describe())
        {
            h ^= c;
            h *= 1099511628211ull;
        }
        return h;
    }

    // ----- Grid ------------------------------------------------------------

    Grid::Grid(double delta, Point origin, int nx, int ny, std::vector<Cell> cells)
        : delta_(delta), origin_(origin), nx_(nx), ny_(ny), cells_(std::move(cells)),
          lattice_(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), -1)
    {
        for (std::size_t n = 0; n < cells_.size(); ++n)
        {
            const Cell &c = cells_[n];
            if (c.i < 0 || c.j < 0 || c.i >= nx_ || c.j >= ny_)
                throw std::invalid_argument("grid cell outside the lattice");
            if (c.eps_r == cplx{1.0, 0.0})
                throw std::invalid_argument("grid cell with eps_r = 1");
            lattice_[static_cast<std::size_t>(c.i) + static_cast<std::size_t>(nx_) * static_cast<std::size_t>(c.j)] =
                static_cast<int>(n);
        }
    }

    double Grid::equivalent_radius() const { return delta_ / std::sqrt(std::numbers::pi); }

    Point Grid::center(int i, int j) const
    {
        return {origin_.x + (i + 0.5) * delta_, origin_.y + (j + 0.5) * delta_};
    }

    std::optional<std::size_t> Grid::cell_at(Point p) const
    {
        if (cells_.empty())
            return std::nullopt;
        const double fx = (p.x - origin_.x) / delta_;
        const double fy = (p.y - origin_.y) / delta_;
        if (fx < 0.0 || fy < 0.0 || fx >= nx_ || fy >= ny_)
            return std::nullopt;
        const auto i = static_cast<std::size_t>(fx);
        const auto j = static_cast<std::size_t>(fy);
        const int n = lattice_[i + static_cast<std::size_t>(nx_) * j];
        if (n < 0)
            return std::nullopt;
        return static_cast<std::size_t>(n);
    }

    Grid rasterize(const Scene &scene, int cells_per_lambda0)
    {
        if (cells_per_lambda0 < 4)
            throw std::invalid_argument("cells_per_lambda0 must be at least 4");
        const double delta = PhysicalConstants::lambda0 / cells_per_lambda0;
        if (scene.empty())
            return Grid(delta, {}, 0, 0, {});

        const BoundingBox box = scene.bounds();
        if (!std::isfinite(box.min.x) || !std::isfinite(box.max.x) || !std::isfinite(box.min.y) ||
            !std::isfinite(box.max.y))
            throw std::invalid_argument("scene bounding box is not finite");

        const int nx = std::max(1, static_cast<int>(std::ceil((box.max.x - box.min.x) / delta - 1e-9)));
        const int ny = std::max(1, static_cast<int>(std::ceil((box.max.y - box.min.y) / delta - 1e-9)));

        std::vector<Cell> cells;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
            {
                const Point c{box.min.x + (i + 0.5) * delta, box.min.y + (j + 0.5) * delta};
                if (auto eps = scene.permittivity_at(c))
                    cells.push_back({i, j, c, *eps});
            }
        return Grid(delta, box.min, nx, ny, std::move(cells));
    }

    // ----- Presets ---------------------------------------------------------

    cplx metal_eps(MetalContrast mode) { return mode == MetalContrast::Full ? kCopperEpsR : kSurrogateMetalEpsR; }

    std::vector<std::string> preset_names() { return {"keyhole", "twin_cylinders", "cavity"}; }

    PresetParams preset_defaults(const std::string &name)
    {
        if (name == "keyhole")
            return {{"S", 1.0}, {"height", 20.0}, {"thickness", 0.1}, {"L", 5.0}, {"D", 5.0}};
        if (name == "twin_cylinders")
            return {{"R", 2.4}, {"eps_r", 3.0}, {"L", 2.0}, {"D", 10.0}};
        if (name == "cavity")
            return {{"Sc", 7.0}, {"side", 10.4}, {"thickness", 0.1}, {"L", 2.0}, {"D", 10.0}};
        throw std::invalid_argument("unknown preset '" + name + "'");
    }

    Scene preset_scene(const std::string &name, const PresetParams &params, MetalContrast metal)
    {
        PresetParams p = preset_defaults(name);
        for (const auto &[key, value] : params)
        {
            if (!p.contains(key))
                throw std::invalid_argument("preset '" + name + "' has no parameter '" + key + "'");
            if (!std::isfinite(value))
                throw std::invalid_argument("parameter '" + key + "' is not finite");
            p[key] = value;
        }
        const double L = p.at("L"), D = p.at("D");
        require_positive(L, "array length L");
        require_positive(D, "array separation D");

        Scene scene;
        const cplx eps_metal = metal_eps(metal);
        if (name == "keyhole")
        {
            const double t = p.at("thickness");
            if (0.5 * t >= 0.5 * D)
                throw std::invalid_argument("keyhole sheet overlaps the array lines");
            scene.add(SheetWithAperture{0.0, p.at("height"), t, p.at("S")}, eps_metal);
        }
        else if (name == "twin_cylinders")
        {
            const double R = p.at("R");
            require_positive(R, "cylinder radius R");
            if (R >= 0.25 * D)
                throw std::invalid_argument("cylinders overlap the array lines (need R < D/4)");
            const cplx eps{p.at("eps_r"), 0.0};
            scene.add(Disk{{-0.25 * D, 0.0}, R}, eps);
            scene.add(Disk{{0.25 * D, 0.0}, R}, eps);
        }
        else // cavity
        {
            const double side = p.at("side"), t = p.at("thickness"), Sc = p.at("Sc");
            if (0.5 * side <= 0.5 * D)
                throw std::invalid_argument("cavity walls overlap the array lines (need side > D)");
            if (0.5 * L >= 0.5 * side)
                throw std::invalid_argument("arrays longer than the cavity interior");
            if (Sc < 0.0 || 0.5 * Sc >= 0.5 * D)
                throw std::invalid_argument("cavity obstacle overlaps the array lines (need 0 <= Sc < D)");
            scene.add(CavityWalls{side, t}, eps_metal);
            if (Sc > 0.0)
                scene.add(Rect{{0.0, 0.0}, Sc, Sc}, eps_metal);
        }
        return scene;
    }

} // namespace edofsim
