// Locate a few points on a deformed 3D mesh split over four ranks and
// interpolate a field there.

#include <cmath>
#include <cstdio>
#include <vector>

#include "fpx/fpx.hpp"

int main() {
  const fpx::Mesh mesh = fpx::generate_mesh(fpx::parse_mesh_spec("refined-box,dim=3,order=4,n=6,amp=0.06"));
  fpx::Cluster cluster(mesh, 4);

  const fpx::Field f = fpx::sample_field(mesh, 6, 1, [](const fpx::Point& x, double* out) {
    out[0] = std::sin(3.0 * x[0]) * std::cos(2.0 * x[1]) + x[2] * x[2];
  });

  const std::vector<fpx::Point> pts{{0.47, 0.52, 0.55}, {0.1, 0.9, 0.33}, {0.999, 0.0, 0.7}, {1.5, 0.5, 0.5}};
  std::vector<fpx::FindRecord> recs;
  const auto vals = cluster.find_and_interpolate(f, pts, &recs);

  std::printf("%-22s %-10s %4s %5s %12s %12s\n", "point", "code", "rank", "elem", "value", "exact");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& x = pts[i];
    const double exact = std::sin(3.0 * x[0]) * std::cos(2.0 * x[1]) + x[2] * x[2];
    std::printf("(%5.3f, %5.3f, %5.3f)  %-10s %4d %5lld %12.8f %12.8f\n", x[0], x[1], x[2],
                fpx::to_string(recs[i].code), recs[i].rank, static_cast<long long>(recs[i].global_elem), vals[i], exact);
  }
}
