#ifndef D2DSIM_IO_HPP_
#define D2DSIM_IO_HPP_

#include <filesystem>
#include <fstream>
#include <iterator>
#include <ostream>
#include <stdexcept>
#include <string>

#include "config.hpp"
#include "geometry.hpp"
#include "routing.hpp"

namespace d2dsim {

inline std::string node_type_name(NodeKind k)
{
    switch (k) {
    case NodeKind::Bs: return "BS";
    case NodeKind::CcUplinkUe: return "CC_UL_UE";
    case NodeKind::CcDownlinkUe: return "CC_DL_UE";
    case NodeKind::D2dUe: return "D2D_UE";
    }
    return {};
}

/// node_type,index,x_m,y_m,serving_bs; serving_bs is empty for BS rows and unassociated UEs.
inline void write_topology_csv(std::ostream &os, const Topology &topo)
{
    using detail::format_double;
    os << "node_type,index,x_m,y_m,serving_bs\n";
    for (NodeKind kind : {NodeKind::Bs, NodeKind::CcUplinkUe, NodeKind::CcDownlinkUe, NodeKind::D2dUe}) {
        const auto &pts = topo.positions(kind);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            os << node_type_name(kind) << ',' << i << ',' << format_double(pts[i].x) << ','
               << format_double(pts[i].y) << ',';
            if (kind != NodeKind::Bs) {
                const std::size_t s = topo.serving({kind, i});
                if (s != npos)
                    os << s;
            }
            os << '\n';
        }
    }
}

/// Route dump columns: trial,scheme,hop_index,node_index,x_m,y_m; hop_index 0 is the source.
inline void write_routes_header(std::ostream &os) { os << "trial,scheme,hop_index,node_index,x_m,y_m\n"; }

inline void write_route_rows(std::ostream &os, std::uint64_t trial, const Route &route, const Topology &topo)
{
    using detail::format_double;
    for (std::size_t h = 0; h < route.hops.size(); ++h) {
        const Point p = topo.d2d_ues[route.hops[h]];
        os << trial << ',' << to_string(route.scheme) << ',' << h << ',' << route.hops[h] << ','
           << format_double(p.x) << ',' << format_double(p.y) << '\n';
    }
}

/// Writes via a sibling temporary and rename, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path &path, const std::string &contents)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        f << contents;
        f.flush();
        if (!f)
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path &path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot read '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

} // namespace d2dsim

#endif // D2DSIM_IO_HPP_
