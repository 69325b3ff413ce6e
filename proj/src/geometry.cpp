#include "helmdisk/geometry.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace helmdisk {

std::optional<DomainViolation> validate_domain(const DiskDomain& dom) {
  if (!(dom.k > 0.0)) {
    return DomainViolation{-1, -1, 0.0, "wavenumber k must be positive"};
  }
  const int n = static_cast<int>(dom.disks.size());
  for (int i = 0; i < n; ++i) {
    if (!(dom.disks[i].radius > 0.0) || !std::isfinite(dom.disks[i].radius) ||
        !dom.disks[i].center.allFinite()) {
      std::ostringstream os;
      os << "disk " << i << " has non-positive or non-finite geometry";
      return DomainViolation{i, -1, 0.0, os.str()};
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Real dist = (dom.disks[i].center - dom.disks[j].center).norm();
      const Real gap = dist - dom.disks[i].radius - dom.disks[j].radius;
      const Real margin = 1e-3 * std::min(dom.disks[i].radius, dom.disks[j].radius);
      if (gap <= margin) {
        std::ostringstream os;
        os << "disks " << i << " and " << j << " touch or overlap (gap " << gap << ")";
        return DomainViolation{i, j, gap, os.str()};
      }
    }
  }
  return std::nullopt;
}

void require_valid(const DiskDomain& dom) {
  if (auto v = validate_domain(dom)) {
    throw std::invalid_argument("helmdisk: invalid domain: " + v->what);
  }
}

bool upper_half_plane(const DiskDomain& dom) {
  for (const Disk& d : dom.disks) {
    if (!(d.center.y() > d.radius)) return false;
  }
  return true;
}

SourceLine::SourceLine(int n) : count(n) {
  if (n <= 0) throw std::invalid_argument("helmdisk: SourceLine needs a positive count");
  points.reserve(n);
  for (int j = 1; j <= n; ++j) {
    points.emplace_back(static_cast<Real>(j) / (n + 1), 0.0);
  }
}

BoundaryGrid::BoundaryGrid(int n_f) : nf(n_f) {
  if (n_f < 16 || (n_f & (n_f - 1)) != 0) {
    throw std::invalid_argument("helmdisk: BoundaryGrid N_f must be a power of two >= 16");
  }
  angles.reserve(n_f);
  for (int n = 0; n < n_f; ++n) {
    angles.push_back(-kPi + kTwoPi * n / n_f);
  }
}

namespace {

using nlohmann::json;

Real number_field(const json& j, const std::string& where) {
  if (!j.is_number()) {
    throw std::invalid_argument("helmdisk: domain config: field '" + where + "' must be a number");
  }
  return j.get<Real>();
}

} // namespace

DiskDomain parse_domain_json(const std::string& text, int* n_sources) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("helmdisk: domain config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw std::invalid_argument("helmdisk: domain config: top level must be an object");
  if (!root.contains("k")) throw std::invalid_argument("helmdisk: domain config: missing field 'k'");

  DiskDomain dom;
  dom.k = number_field(root["k"], "k");

  if (root.contains("disks")) {
    const json& arr = root["disks"];
    if (!arr.is_array()) throw std::invalid_argument("helmdisk: domain config: 'disks' must be an array");
    int idx = 0;
    for (const json& dj : arr) {
      std::ostringstream tag;
      tag << "disks[" << idx << "]";
      if (!dj.is_object() || !dj.contains("center") || !dj.contains("radius")) {
        throw std::invalid_argument("helmdisk: domain config: " + tag.str() +
                                    " needs 'center' and 'radius'");
      }
      const json& c = dj["center"];
      if (!c.is_array() || c.size() != 2) {
        throw std::invalid_argument("helmdisk: domain config: " + tag.str() +
                                    ".center must be [x1, x2]");
      }
      Disk d;
      d.center = Point2(number_field(c[0], tag.str() + ".center[0]"),
                        number_field(c[1], tag.str() + ".center[1]"));
      d.radius = number_field(dj["radius"], tag.str() + ".radius");
      dom.disks.push_back(d);
      ++idx;
    }
  }

  if (n_sources != nullptr) {
    *n_sources = 0;
    if (root.contains("sources")) {
      if (!root["sources"].is_number_integer() || root["sources"].get<int>() <= 0) {
        throw std::invalid_argument("helmdisk: domain config: 'sources' must be a positive integer");
      }
      *n_sources = root["sources"].get<int>();
    }
  }

  if (auto v = validate_domain(dom)) {
    throw std::invalid_argument("helmdisk: domain config: " + v->what);
  }
  return dom;
}

std::string domain_to_json(const DiskDomain& dom, int n_sources) {
  json root;
  root["k"] = dom.k;
  root["disks"] = json::array();
  for (const Disk& d : dom.disks) {
    root["disks"].push_back({{"center", {d.center.x(), d.center.y()}}, {"radius", d.radius}});
  }
  if (n_sources > 0) root["sources"] = n_sources;
  return root.dump(2);
}

DiskDomain load_domain_file(const std::string& path, int* n_sources) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("helmdisk: cannot open domain file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_domain_json(ss.str(), n_sources);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(e.what()) + " (file '" + path + "')");
  }
}

} // namespace helmdisk
