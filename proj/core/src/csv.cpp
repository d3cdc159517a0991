#include "projnod/csv.hpp"

#include <charconv>
#include <cmath>

namespace projnod::csv {

void write_provenance(std::ostream& out, const Provenance& prov) {
  out << "# scenario_hash=" << prov.scenario_hash << "\n";
  out << "# seed=" << (prov.seed ? std::to_string(*prov.seed) : std::string("none")) << "\n";
  for (const auto& note : prov.notes) out << "# " << note << "\n";
}

std::string format(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trajectory(std::ostream& out, const Trajectory& traj, const Provenance& prov) {
  write_provenance(out, prov);
  if (traj.samples() == 0) return;
  const auto agents = traj.full.front().rows();
  const auto options = traj.full.front().cols();
  out << "t";
  for (Eigen::Index i = 0; i < agents; ++i) {
    for (Eigen::Index j = 0; j < options; ++j) out << ",z_" << i + 1 << "_" << j + 1;
  }
  if (traj.has_effective()) {
    for (Eigen::Index i = 0; i < agents; ++i) out << ",y_" << i + 1;
  }
  out << "\n";
  for (std::size_t k = 0; k < traj.samples(); ++k) {
    out << format(traj.times[k]);
    const auto& z = traj.full[k];
    for (Eigen::Index i = 0; i < agents; ++i) {
      for (Eigen::Index j = 0; j < options; ++j) out << "," << format(z(i, j));
    }
    if (traj.has_effective()) {
      for (Eigen::Index i = 0; i < agents; ++i) out << "," << format(traj.effective[k](i));
    }
    out << "\n";
  }
}

void write_diagram(std::ostream& out, const std::vector<const BifurcationDiagram*>& diagrams, const Provenance& prov) {
  write_provenance(out, prov);
  Eigen::Index agents = 0;
  for (const auto* d : diagrams) {
    if (!d->points.empty()) agents = std::max(agents, d->points.front().y.size());
  }
  for (const auto* d : diagrams) {
    for (double u : d->gaps) out << "# gap method=" << d->method << " u=" << format(u) << "\n";
  }
  out << "method,u,branch_id,stability,x_ls";
  for (Eigen::Index i = 0; i < agents; ++i) out << ",y_" << i + 1;
  out << "\n";
  for (const auto* d : diagrams) {
    for (const auto& pt : d->points) {
      out << d->method << "," << format(pt.u) << "," << pt.branch << "," << to_string(pt.stability) << ","
          << format(pt.x_ls);
      for (Eigen::Index i = 0; i < pt.y.size(); ++i) out << "," << format(pt.y(i));
      out << "\n";
    }
  }
}

void write_centrality(std::ostream& out, const CentralityReport& report, const Provenance& prov) {
  write_provenance(out, prov);
  out << "node,exact,approx,abs_diff\n";
  const Eigen::VectorXd& exact = report.exact.vector;
  Eigen::VectorXd approx;
  if (report.approx) {
    approx = report.approx->normalized();
    if (approx.dot(exact) < 0.0) approx = -approx;
  }
  for (Eigen::Index i = 0; i < exact.size(); ++i) {
    out << i + 1 << "," << format(exact(i)) << ",";
    if (report.approx) {
      out << format(approx(i)) << "," << format(std::abs(approx(i) - exact(i)));
    } else {
      out << ",";
    }
    out << "\n";
  }
}

}  // namespace projnod::csv
