#include <algorithm>

#include "perr/edt.hpp"

namespace perr {
namespace {

// Displacement of an index time B caused by one preceding event at t.
double displacement(double B, double t, double theta, double delta) {
  if (t + theta * delta < B) return (1.0 - theta) * delta;
  return (B - t) * (1.0 / theta - 1.0);
}

}  // namespace

double shift_index_time(double index_time, std::span<const double> events, double theta,
                        double delta) {
  if (theta == 1.0 || delta == 0.0) return index_time;
  double B = index_time;
  if (theta > 1.0) {
    auto it = std::lower_bound(events.begin(), events.end(), B);
    if (it == events.begin()) return B;
    return B + displacement(B, *std::prev(it), theta, delta);
  }
  // theta < 1 pushes B later, so events that were after B can come to precede it.
  for (double t : events) {
    if (!(t < B)) break;
    B += displacement(B, t, theta, delta);
  }
  return B;
}

}  // namespace perr
