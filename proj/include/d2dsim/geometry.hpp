#ifndef D2DSIM_GEOMETRY_HPP_
#define D2DSIM_GEOMETRY_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "config.hpp"
#include "rng.hpp"

namespace d2dsim {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    bool operator==(const Point &) const = default;
};

inline double norm2(Point p) { return p.x * p.x + p.y * p.y; }
inline double norm(Point p) { return std::sqrt(norm2(p)); }

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

/**
 * A flat torus: the plane modulo the lattice spanned by two translation
 * vectors. HEX19 uses the 19-cell cluster translations (a hexagonal fundamental
 * domain made of 19 cells); PPP_FIELD uses a square of side L.
 */
class Extent {
public:
    static Extent square(double side)
    {
        Extent e;
        e.mode_ = TopologyMode::PppField;
        e.side_ = side;
        e.t1_ = {side, 0.0};
        e.t2_ = {0.0, side};
        e.finish();
        return e;
    }

    /// 19-cell hexagonal cluster with cell circumradius R.
    static Extent hex19(double cell_radius)
    {
        Extent e;
        e.mode_ = TopologyMode::Hex19Wraparound;
        e.radius_ = cell_radius;
        const double d = std::sqrt(3.0) * cell_radius;
        e.side_ = d;
        // 3*a1 + 2*a2 and its 60 degree rotation, with a1 = (d, 0), a2 = (d/2, d*sqrt3/2).
        e.t1_ = {4.0 * d, std::sqrt(3.0) * d};
        e.t2_ = {0.5 * d, 2.5 * std::sqrt(3.0) * d};
        e.finish();
        e.sites_ = hex19_sites(cell_radius);
        return e;
    }

    /// Cell centers of the 19-cell cluster: center, first ring, second ring.
    static std::vector<Point> hex19_sites(double cell_radius)
    {
        const double d = std::sqrt(3.0) * cell_radius;
        const Point a1{d, 0.0};
        const Point a2{0.5 * d, 0.5 * std::sqrt(3.0) * d};
        // Axial directions around a ring, starting east and turning counter-clockwise.
        const std::array<Point, 6> dirs = {a1, a2, a2 - a1, Point{} - a1, Point{} - a2, a1 - a2};
        std::vector<Point> sites{Point{}};
        for (int ring = 1; ring <= 2; ++ring) {
            Point p = static_cast<double>(ring) * dirs[4];
            for (int side = 0; side < 6; ++side)
                for (int step = 0; step < ring; ++step) {
                    sites.push_back(p);
                    p = p + dirs[side];
                }
        }
        return sites;
    }

    TopologyMode mode() const noexcept { return mode_; }
    /// Square side, or inter-site distance for the hexagonal cluster.
    double pitch() const noexcept { return side_; }
    double cell_radius() const noexcept { return radius_; }
    Point translation1() const noexcept { return t1_; }
    Point translation2() const noexcept { return t2_; }
    double area() const noexcept { return std::abs(t1_.x * t2_.y - t1_.y * t2_.x); }

    /// Shortest representative of b - a over all lattice images.
    Point delta(Point a, Point b) const
    {
        const Point v = b - a;
        if (mode_ == TopologyMode::PppField) {
            return {v.x - side_ * std::nearbyint(v.x / side_), v.y - side_ * std::nearbyint(v.y / side_)};
        }
        const double s = std::nearbyint(inv_[0] * v.x + inv_[1] * v.y);
        const double u = std::nearbyint(inv_[2] * v.x + inv_[3] * v.y);
        Point best = v;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (int ds = -1; ds <= 1; ++ds)
            for (int du = -1; du <= 1; ++du) {
                const Point c = v - (s + ds) * t1_ - (u + du) * t2_;
                const double d2 = norm2(c);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = c;
                }
            }
        return best;
    }

    /// Wrap-around distance without the containment check.
    double distance(Point a, Point b) const { return norm(delta(a, b)); }

    bool contains(Point p) const
    {
        if (mode_ == TopologyMode::PppField) {
            const double h = 0.5 * side_ + 1e-9 * side_;
            return p.x >= -h && p.x <= h && p.y >= -h && p.y <= h;
        }
        for (const Point &s : sites_)
            if (in_hexagon(p - s, radius_, 1e-9 * radius_))
                return true;
        return false;
    }

    /// Maps any point to its representative inside the fundamental domain.
    Point wrap(Point p) const
    {
        if (mode_ == TopologyMode::PppField) {
            Point q = delta(Point{}, p);
            // Keep the half-open convention [-L/2, L/2).
            if (q.x >= 0.5 * side_) q.x -= side_;
            if (q.y >= 0.5 * side_) q.y -= side_;
            return q;
        }
        std::size_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        Point best_delta{};
        for (std::size_t i = 0; i < sites_.size(); ++i) {
            const Point dlt = delta(sites_[i], p);
            const double d2 = norm2(dlt);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = i;
                best_delta = dlt;
            }
        }
        return sites_[best] + best_delta;
    }

    /// Pointy-top hexagon of circumradius r centered at the origin.
    static bool in_hexagon(Point p, double r, double eps = 0.0)
    {
        const double ax = std::abs(p.x);
        const double ay = std::abs(p.y);
        return ax <= 0.5 * std::sqrt(3.0) * r + eps && ay <= r - ax / std::sqrt(3.0) + eps;
    }

private:
    void finish()
    {
        const double det = t1_.x * t2_.y - t1_.y * t2_.x;
        inv_ = {t2_.y / det, -t2_.x / det, -t1_.y / det, t1_.x / det};
    }

    TopologyMode mode_ = TopologyMode::PppField;
    double side_ = 0.0;
    double radius_ = 0.0;
    Point t1_{}, t2_{};
    std::array<double, 4> inv_{};
    std::vector<Point> sites_;
};

/// Checked wrap-around distance; both points must lie in the extent.
inline double wrap_distance(Point a, Point b, const Extent &extent)
{
    if (!extent.contains(a) || !extent.contains(b))
        throw std::out_of_range("wrap_distance: point outside extent");
    return extent.distance(a, b);
}

/// Ground distance plus the BS-UE antenna height offset (FULL fidelity only).
inline double link_distance_3d(Point ue, Point bs, const ScenarioConfig &config, const Extent &extent)
{
    const double ground = extent.distance(ue, bs);
    if (config.validation())
        return ground;
    const double h = config.antenna_height_diff_m;
    return std::sqrt(ground * ground + h * h);
}

/// CDF of the nearest-neighbor distance in a planar PPP of the given density.
inline double nearest_bs_distance_cdf(double r, double density)
{
    return -std::expm1(-density * kPi * r * r);
}

inline Point uniform_in_hexagon(Point center, double radius, Rng &rng)
{
    const double half_w = 0.5 * std::sqrt(3.0) * radius;
    for (;;) {
        const Point p{rng.uniform(-half_w, half_w), rng.uniform(-radius, radius)};
        if (Extent::in_hexagon(p, radius))
            return center + p;
    }
}

/// Homogeneous PPP over the whole extent.
inline std::vector<Point> sample_ppp(double density, const Extent &extent, Rng &rng)
{
    const auto count = rng.poisson(density * extent.area());
    std::vector<Point> pts;
    pts.reserve(count);
    if (extent.mode() == TopologyMode::PppField) {
        const double h = 0.5 * extent.pitch();
        for (std::uint64_t i = 0; i < count; ++i) {
            const double x = rng.uniform(-h, h);
            const double y = rng.uniform(-h, h);
            pts.push_back({x, y});
        }
    } else {
        const auto sites = Extent::hex19_sites(extent.cell_radius());
        for (std::uint64_t i = 0; i < count; ++i) {
            const Point c = sites[rng.index(sites.size())];
            pts.push_back(uniform_in_hexagon(c, extent.cell_radius(), rng));
        }
    }
    return pts;
}

/// Bucket grid over a square torus for nearest-site queries.
class SquareGrid {
public:
    SquareGrid(const std::vector<Point> &sites, double side, double sites_per_bucket = 2.0)
        : sites_(&sites), side_(side), ext_(Extent::square(side))
    {
        const double n = std::max<double>(1.0, static_cast<double>(sites.size()));
        const double bucket = std::sqrt(side * side * sites_per_bucket / n);
        dim_ = std::max<std::size_t>(1, static_cast<std::size_t>(side / bucket));
        bucket_ = side / static_cast<double>(dim_);
        buckets_.assign(dim_ * dim_, {});
        for (std::size_t i = 0; i < sites.size(); ++i)
            buckets_[bucket_of(sites[i])].push_back(i);
    }

    /// Nearest site by wrap distance; ties go to the lowest index. npos if empty.
    std::size_t nearest(Point p) const
    {
        if (sites_->empty())
            return npos;
        const auto [bx, by] = coords(p);
        std::size_t best = npos;
        double best_d = std::numeric_limits<double>::infinity();
        const std::size_t max_ring = dim_ / 2 + 1;
        for (std::size_t ring = 0; ring <= max_ring; ++ring) {
            const auto r = static_cast<long>(ring);
            for (long dy = -r; dy <= r; ++dy)
                for (long dx = -r; dx <= r; ++dx) {
                    if (std::max(std::labs(dx), std::labs(dy)) != r)
                        continue;
                    const std::size_t cx = wrap_index(static_cast<long>(bx) + dx);
                    const std::size_t cy = wrap_index(static_cast<long>(by) + dy);
                    for (std::size_t i : buckets_[cy * dim_ + cx]) {
                        const double d = ext_.distance(p, (*sites_)[i]);
                        if (d < best_d || (d == best_d && i < best)) {
                            best_d = d;
                            best = i;
                        }
                    }
                }
            if (2 * ring + 1 >= dim_)
                break;
            // Anything in the next ring is at least ring * bucket away.
            if (best != npos && best_d < static_cast<double>(ring) * bucket_)
                break;
        }
        return best;
    }

private:
    std::pair<std::size_t, std::size_t> coords(Point p) const
    {
        auto c = [&](double v) {
            auto i = static_cast<long>(std::floor((v + 0.5 * side_) / bucket_));
            return wrap_index(i);
        };
        return {c(p.x), c(p.y)};
    }

    std::size_t bucket_of(Point p) const
    {
        const auto [x, y] = coords(p);
        return y * dim_ + x;
    }

    std::size_t wrap_index(long i) const
    {
        const long d = static_cast<long>(dim_);
        return static_cast<std::size_t>(((i % d) + d) % d);
    }

    const std::vector<Point> *sites_;
    double side_;
    Extent ext_;
    std::size_t dim_ = 1;
    double bucket_ = 0.0;
    std::vector<std::vector<std::size_t>> buckets_;
};

enum class NodeKind { Bs, CcUplinkUe, CcDownlinkUe, D2dUe };

struct NodeRef {
    NodeKind kind = NodeKind::Bs;
    std::size_t index = 0;
    bool operator==(const NodeRef &) const = default;
};

/**
 * One spatial realization. UE association vectors hold the serving BS index
 * under the wrap metric (npos when the realization has no BS).
 */
struct Topology {
    TopologyMode mode = TopologyMode::Hex19Wraparound;
    Extent extent = Extent::square(1.0);
    std::vector<Point> bs;
    std::vector<Point> cc_ul_ues;
    std::vector<Point> cc_dl_ues;
    std::vector<Point> d2d_ues;
    std::vector<std::size_t> cc_ul_serving;
    std::vector<std::size_t> cc_dl_serving;
    std::vector<std::size_t> d2d_serving;
    /// Per BS, the D2D UE holding that cell's active D2D link (lowest index), or npos.
    std::vector<std::size_t> d2d_designated;

    const std::vector<Point> &positions(NodeKind kind) const
    {
        switch (kind) {
        case NodeKind::Bs: return bs;
        case NodeKind::CcUplinkUe: return cc_ul_ues;
        case NodeKind::CcDownlinkUe: return cc_dl_ues;
        case NodeKind::D2dUe: return d2d_ues;
        }
        return bs;
    }

    std::vector<Point> &positions(NodeKind kind)
    {
        return const_cast<std::vector<Point> &>(std::as_const(*this).positions(kind));
    }

    Point position(NodeRef n) const { return positions(n.kind)[n.index]; }

    /// Serving BS of a UE; a BS serves itself.
    std::size_t serving(NodeRef n) const
    {
        switch (n.kind) {
        case NodeKind::Bs: return n.index;
        case NodeKind::CcUplinkUe: return cc_ul_serving[n.index];
        case NodeKind::CcDownlinkUe: return cc_dl_serving[n.index];
        case NodeKind::D2dUe: return d2d_serving[n.index];
        }
        return npos;
    }

    std::vector<std::size_t> &serving_list(NodeKind kind)
    {
        switch (kind) {
        case NodeKind::CcUplinkUe: return cc_ul_serving;
        case NodeKind::CcDownlinkUe: return cc_dl_serving;
        default: return d2d_serving;
        }
    }

    /// Nearest BS by wrap distance, lowest index on ties. Brute force.
    std::size_t nearest_bs(Point p) const
    {
        std::size_t best = npos;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < bs.size(); ++i) {
            const double d = extent.distance(p, bs[i]);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    }

    /// Moves a UE and refreshes its association.
    void place(NodeRef n, Point p)
    {
        positions(n.kind)[n.index] = extent.wrap(p);
        if (n.kind != NodeKind::Bs)
            serving_list(n.kind)[n.index] = nearest_bs(positions(n.kind)[n.index]);
        if (n.kind == NodeKind::D2dUe)
            refresh_designated();
    }

    void refresh_designated()
    {
        d2d_designated.assign(bs.size(), npos);
        for (std::size_t i = d2d_ues.size(); i-- > 0;)
            if (d2d_serving[i] != npos)
                d2d_designated[d2d_serving[i]] = i;
    }

    /// Indices of D2D UEs served by each BS, in ascending order.
    std::vector<std::vector<std::size_t>> d2d_members() const
    {
        std::vector<std::vector<std::size_t>> members(bs.size());
        for (std::size_t i = 0; i < d2d_ues.size(); ++i)
            if (d2d_serving[i] != npos)
                members[d2d_serving[i]].push_back(i);
        return members;
    }
};

/// Ground distance between two nodes, with the antenna height offset on BS-UE links.
inline double node_distance(const Topology &topo, NodeRef a, NodeRef b, const ScenarioConfig &config)
{
    const Point pa = topo.position(a);
    const Point pb = topo.position(b);
    if ((a.kind == NodeKind::Bs) != (b.kind == NodeKind::Bs))
        return link_distance_3d(pa, pb, config, topo.extent);
    return topo.extent.distance(pa, pb);
}

namespace detail {

/// Drops one UE uniformly in cell c; points on a cell border get the brute-force association.
inline void drop_in_cell(Topology &t, std::vector<Point> &pts, std::vector<std::size_t> &serving,
                         std::size_t cell, Rng &rng)
{
    const double r = t.extent.cell_radius();
    const Point p = uniform_in_hexagon(t.bs[cell], r, rng);
    pts.push_back(p);
    const bool interior = Extent::in_hexagon(p - t.bs[cell], r * (1.0 - 1e-9));
    serving.push_back(interior ? cell : t.nearest_bs(p));
}

} // namespace detail

inline Topology build_topology(const ScenarioConfig &config, Rng &rng)
{
    Topology t;
    t.mode = config.topology_mode;
    if (config.topology_mode == TopologyMode::Hex19Wraparound) {
        t.extent = Extent::hex19(config.bs_radius_m);
        t.bs = Extent::hex19_sites(config.bs_radius_m);
        const auto per_cell = static_cast<std::size_t>(config.d2d_ues_per_bs);
        t.d2d_ues.reserve(t.bs.size() * per_cell);
        for (std::size_t c = 0; c < t.bs.size(); ++c) {
            detail::drop_in_cell(t, t.cc_ul_ues, t.cc_ul_serving, c, rng);
            detail::drop_in_cell(t, t.cc_dl_ues, t.cc_dl_serving, c, rng);
            for (std::size_t k = 0; k < per_cell; ++k)
                detail::drop_in_cell(t, t.d2d_ues, t.d2d_serving, c, rng);
        }
        t.refresh_designated();
        return t;
    }

    t.extent = Extent::square(config.ppp_extent_m);
    t.bs = sample_ppp(config.bs_density_per_m2, t.extent, rng);
    t.cc_ul_ues = sample_ppp(config.cc_ue_density_per_m2, t.extent, rng);
    t.cc_dl_ues = sample_ppp(config.cc_ue_density_per_m2, t.extent, rng);
    t.d2d_ues = sample_ppp(config.d2d_density_per_m2, t.extent, rng);
    const SquareGrid grid(t.bs, config.ppp_extent_m);
    auto associate = [&](const std::vector<Point> &pts, std::vector<std::size_t> &out) {
        out.resize(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i)
            out[i] = grid.nearest(pts[i]);
    };
    associate(t.cc_ul_ues, t.cc_ul_serving);
    associate(t.cc_dl_ues, t.cc_dl_serving);
    associate(t.d2d_ues, t.d2d_serving);
    t.refresh_designated();
    return t;
}

} // namespace d2dsim

#endif // D2DSIM_GEOMETRY_HPP_
