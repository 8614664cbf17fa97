#include "hollow/nn/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hollow::nn {

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw Error("checkpoint: cannot open '" + path + "' for writing");
  out << "hollownet-checkpoint v1\n";
  for (const auto& [k, v] : ckpt.meta) out << "meta " << k << " " << v << "\n";
  char buf[64];
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const Tensor& t = ckpt.params.values[i];
    out << "tensor " << ckpt.params.names[i] << " " << int(t.shape.rank) << " "
        << t.shape.d0 << " " << t.shape.d1 << "\n";
    for (std::size_t j = 0; j < t.numel(); ++j) {
      std::snprintf(buf, sizeof buf, "%a", t.v[j]);
      out << buf << (j + 1 == t.numel() ? "" : " ");
    }
    out << "\n";
  }
  out << "end\n";
  if (!out) throw Error("checkpoint: write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("checkpoint: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "hollownet-checkpoint v1")
    throw Error("checkpoint: bad header in '" + path + "'");
  Checkpoint ckpt;
  while (std::getline(in, line)) {
    if (line == "end") return ckpt;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "meta") {
      std::string key;
      ls >> key;
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value[0] == ' ') value.erase(0, 1);
      ckpt.meta[key] = value;
    } else if (tag == "tensor") {
      std::string name;
      int rank;
      std::uint32_t d0, d1;
      ls >> name >> rank >> d0 >> d1;
      if (!ls) throw Error("checkpoint: malformed tensor header");
      Shape s{static_cast<std::uint8_t>(rank), d0, d1};
      Tensor t(s);
      std::string data;
      if (!std::getline(in, data))
        throw Error("checkpoint: missing data for tensor '" + name + "'");
      const char* p = data.c_str();
      char* endp = nullptr;
      for (std::size_t j = 0; j < t.numel(); ++j) {
        t.v[j] = std::strtod(p, &endp);
        if (endp == p)
          throw Error("checkpoint: short data row for tensor '" + name + "'");
        p = endp;
      }
      ckpt.params.add(name, std::move(t));
    } else if (!tag.empty()) {
      throw Error("checkpoint: unknown record '" + tag + "'");
    }
  }
  throw Error("checkpoint: missing end marker in '" + path + "'");
}

}  // namespace hollow::nn
