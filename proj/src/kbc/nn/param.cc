#include "kbc/nn/param.h"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>

#include "kbc/base/errors.h"

namespace kbc::nn {

void ZeroGrads(const ParamList &params) {
  for (Param *p : params) p->grad.SetZero();
}

void Adam::Step(const ParamList &params, double lr) {
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (Param *p : params) {
    auto &w = p->value.values();
    const auto &g = p->grad.values();
    auto &m = p->m.values();
    auto &v = p->v.values();
    for (size_t i = 0; i < w.size(); ++i) {
      double gi = g[i] + config_.weight_decay * w[i];
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
    }
  }
}

Snapshot TakeSnapshot(const ParamList &params) {
  Snapshot s;
  for (const Param *p : params) {
    s.names.push_back(p->name);
    s.values.push_back(p->value);
  }
  return s;
}

void RestoreSnapshot(const Snapshot &snapshot, const ParamList &params) {
  if (snapshot.values.size() != params.size()) {
    throw ConfigError("snapshot does not match parameter list");
  }
  for (size_t i = 0; i < params.size(); ++i) params[i]->value = snapshot.values[i];
}

void SaveParams(const ParamList &params, const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  for (const Param *p : params) {
    uint32_t len = static_cast<uint32_t>(p->name.size());
    int32_t rows = p->value.rows(), cols = p->value.cols();
    out.write(reinterpret_cast<const char *>(&len), sizeof(len));
    out.write(p->name.data(), len);
    out.write(reinterpret_cast<const char *>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char *>(&cols), sizeof(cols));
    out.write(reinterpret_cast<const char *>(p->value.values().data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) throw IoError("write failed for " + path);
}

void LoadParams(const ParamList &params, const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::map<std::string, Matrix> stored;
  while (true) {
    uint32_t len = 0;
    if (!in.read(reinterpret_cast<char *>(&len), sizeof(len))) break;
    std::string name(len, '\0');
    int32_t rows = 0, cols = 0;
    in.read(name.data(), len);
    in.read(reinterpret_cast<char *>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char *>(&cols), sizeof(cols));
    Matrix m(rows, cols);
    in.read(reinterpret_cast<char *>(m.values().data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw IoError("truncated parameter file " + path);
    stored[name] = std::move(m);
  }
  for (Param *p : params) {
    auto it = stored.find(p->name);
    if (it == stored.end()) throw IoError("parameter " + p->name + " missing from " + path);
    if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols()) {
      throw IoError("parameter " + p->name + " has the wrong shape in " + path);
    }
    p->value = it->second;
  }
}

bool AllFinite(const ParamList &params) {
  for (const Param *p : params) {
    for (double x : p->value.values()) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

}  // namespace kbc::nn
