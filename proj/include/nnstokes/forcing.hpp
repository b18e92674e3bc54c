#ifndef NNSTOKES_FORCING_HPP
#define NNSTOKES_FORCING_HPP

#include "nnstokes/mac_grid.hpp"

namespace nnstokes {

/// How the point mass is distributed over nearby u-faces.
enum class DiracSpread {
  Bilinear,  // four nearest interior u-faces, bilinear weights
  Bump,      // (1 - (r/radius)^2)^2 over faces within `radius`
};

struct DiracOptions {
  DiracSpread spread = DiracSpread::Bilinear;
  double radius = 0.0;  // Bump only; 0 selects 2h
};

/// Measure-type forcing: G solves -Lap_h G = (amplitude / h^2) delta on the
/// u-face lattice with zero Dirichlet data, and f = grad_h G placed in the
/// first row (f11 = dG/dx at cells, f12 = dG/dy at nodes). Then -div_h f is
/// the point force amplitude * e_1 at the center.
ForcingField rough_forcing_dirac(const MacGrid& grid, double cx, double cy, double amplitude,
                                 const DiracOptions& options = {});

/// f chi_{|f| < k}, |.| the Frobenius magnitude at each sample site: cells see
/// their own diagonal entries and the corner mean of squared off-diagonal
/// entries, nodes the reverse.
ForcingField truncate_forcing(const ForcingField& f, double k);

/// Frobenius magnitude of f at nodes, the counterpart of cell_magnitude.
std::vector<double> node_magnitude(const StaggeredTensor& t);

}  // namespace nnstokes

#endif  // NNSTOKES_FORCING_HPP
