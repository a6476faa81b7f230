#ifndef D2DSIM_TESTS_SUPPORT_HPP_
#define D2DSIM_TESTS_SUPPORT_HPP_

#include <vector>

#include "d2dsim/geometry.hpp"

namespace support {

/// Square-torus topology with one BS at the origin and the given D2D UEs.
inline d2dsim::Topology d2d_only(const std::vector<d2dsim::Point> &ues, double side = 1e6)
{
    d2dsim::Topology t;
    t.mode = d2dsim::TopologyMode::PppField;
    t.extent = d2dsim::Extent::square(side);
    t.bs = {{0.0, 0.0}};
    t.d2d_ues = ues;
    t.d2d_serving.assign(ues.size(), 0);
    t.refresh_designated();
    return t;
}

} // namespace support

#endif // D2DSIM_TESTS_SUPPORT_HPP_
