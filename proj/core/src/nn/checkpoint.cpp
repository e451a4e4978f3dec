#include "uwbloc/nn/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "uwbloc/csvio.hpp"
#include "uwbloc/errors.hpp"

namespace uwbloc::nn {

namespace {
constexpr const char* kMagic = "uwbloc-checkpoint 1";
}

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw data_error("checkpoint: cannot open " + path + " for write");
  out << kMagic << "\n";
  out << "kind " << ckpt.kind << "\n";
  for (const auto& [k, v] : ckpt.meta) out << "meta " << k << " " << v << "\n";
  for (const auto& [name, t] : ckpt.tensors) {
    out << "tensor " << name << " " << t.rank();
    for (int d : t.shape) out << " " << d;
    out << "\n";
    for (int i = 0; i < t.numel(); ++i) {
      if (i) out << " ";
      out << format_full(t.data[i]);
    }
    out << "\n";
  }
  out << "end\n";
  if (!out) throw data_error("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("checkpoint: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kMagic)
    throw data_error("checkpoint: bad magic in " + path);
  Checkpoint ckpt;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "kind") {
      ls >> ckpt.kind;
    } else if (tag == "meta") {
      std::string k, v;
      ls >> k;
      std::getline(ls, v);
      if (!v.empty() && v.front() == ' ') v.erase(0, 1);
      if (k.empty()) throw data_error("checkpoint: meta without key");
      ckpt.meta[k] = v;
    } else if (tag == "tensor") {
      std::string name;
      int rank = -1;
      ls >> name >> rank;
      if (name.empty() || rank < 0 || rank > 4)
        throw data_error("checkpoint: bad tensor header: " + line);
      std::vector<int> shape(rank);
      long numel = 1;
      for (int i = 0; i < rank; ++i) {
        if (!(ls >> shape[i]) || shape[i] < 0)
          throw data_error("checkpoint: bad tensor shape: " + line);
        numel *= shape[i];
      }
      std::string values;
      if (!std::getline(in, values))
        throw data_error("checkpoint: missing values for tensor " + name);
      Tensor t(shape);
      std::istringstream vs(values);
      for (long i = 0; i < numel; ++i)
        if (!(vs >> t.data[i]))
          throw data_error("checkpoint: short value row for tensor " + name);
      double extra;
      if (vs >> extra)
        throw data_error("checkpoint: excess values for tensor " + name);
      ckpt.tensors.emplace_back(name, std::move(t));
    } else if (tag == "end") {
      ended = true;
      break;
    } else {
      throw data_error("checkpoint: unknown record '" + tag + "'");
    }
  }
  if (!ended) throw data_error("checkpoint: truncated file " + path);
  if (ckpt.kind.empty()) throw data_error("checkpoint: missing kind");
  return ckpt;
}

}  // namespace uwbloc::nn
