#include "stealth/serialize.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace stealth {

using nlohmann::json;

namespace {

void dump_number(double v, std::string& out) {
  if (v == 0.0) {  // normalize -0.0
    out += '0';
    return;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void dump_value(const json& j, std::string& out) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      // nlohmann's object_t is std::map: iteration is already sorted
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        dump_value(it.value(), out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        dump_value(j[i], out);
      }
      out += ']';
      break;
    }
    case json::value_t::string:
      out += j.dump();
      break;
    case json::value_t::number_integer: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%" PRId64, j.get<std::int64_t>());
      out += buf;
      break;
    }
    case json::value_t::number_unsigned: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%" PRIu64, j.get<std::uint64_t>());
      out += buf;
      break;
    }
    case json::value_t::number_float:
      dump_number(j.get<double>(), out);
      break;
    case json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      break;
    default:
      out += "null";
      break;
  }
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& a, const char* what) {
  if (!a.is_array()) throw ParseError(std::string(what) + ": expected array");
  Vec v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw ParseError(std::string(what) + ": expected number");
    v[static_cast<int>(i)] = a[i].get<double>();
  }
  return v;
}

}  // namespace

std::string canonical_dump(const json& j) {
  std::string out;
  dump_value(j, out);
  return out;
}

json model_to_json(const Network& net) {
  json j;
  j["input_dim"] = net.input_dim;
  j["input_box"] = {{"lower", vec_to_json(net.input_box.lower)},
                    {"upper", vec_to_json(net.input_box.upper)}};
  json layers = json::array();
  for (const DenseLayer& L : net.layers) {
    json rows = json::array();
    for (int i = 0; i < L.out_dim; ++i) {
      json row = json::array();
      for (int k = 0; k < L.in_dim; ++k) row.push_back(L.weights(i, k));
      rows.push_back(std::move(row));
    }
    layers.push_back({{"in_dim", L.in_dim},
                      {"out_dim", L.out_dim},
                      {"activation", to_string(L.activation)},
                      {"weights", std::move(rows)},
                      {"biases", vec_to_json(L.biases)}});
  }
  j["layers"] = std::move(layers);
  json meta = json::object();
  for (const auto& [k, v] : net.metadata) meta[k] = v;
  j["metadata"] = std::move(meta);
  return j;
}

Network model_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("model: expected top-level object");
  Network net;
  try {
    net.input_dim = j.at("input_dim").get<int>();
    net.input_box.lower = vec_from_json(j.at("input_box").at("lower"), "input_box.lower");
    net.input_box.upper = vec_from_json(j.at("input_box").at("upper"), "input_box.upper");
    for (const json& lj : j.at("layers")) {
      DenseLayer L;
      L.in_dim = lj.at("in_dim").get<int>();
      L.out_dim = lj.at("out_dim").get<int>();
      L.activation = activation_from_string(lj.at("activation").get<std::string>());
      const json& rows = lj.at("weights");
      if (!rows.is_array() || static_cast<int>(rows.size()) != L.out_dim)
        throw ShapeError("model: weight row count does not match out_dim");
      L.weights.resize(L.out_dim, L.in_dim);
      for (int i = 0; i < L.out_dim; ++i) {
        const json& row = rows[i];
        if (!row.is_array() || static_cast<int>(row.size()) != L.in_dim)
          throw ShapeError("model: weight row length does not match in_dim");
        for (int k = 0; k < L.in_dim; ++k) L.weights(i, k) = row[k].get<double>();
      }
      L.biases = vec_from_json(lj.at("biases"), "biases");
      net.layers.push_back(std::move(L));
    }
    if (j.contains("metadata"))
      for (auto it = j.at("metadata").begin(); it != j.at("metadata").end(); ++it)
        net.metadata[it.key()] = it.value().get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  net.validate();
  return net;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

Network load_model(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

void save_model(const Network& net, const std::filesystem::path& path) {
  write_file(path, canonical_dump(model_to_json(net)));
}

VectorSet load_vectors(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  VectorSet set;
  try {
    set.dim = j.at("dim").get<int>();
    for (const json& vj : j.at("vectors")) {
      Vec v = vec_from_json(vj, "vectors");
      if (v.size() != set.dim)
        throw ShapeError("vector length does not match declared dim");
      set.vectors.push_back(std::move(v));
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return set;
}

void save_vectors(const VectorSet& set, const std::filesystem::path& path) {
  json j;
  j["dim"] = set.dim;
  json arr = json::array();
  for (const Vec& v : set.vectors) arr.push_back(vec_to_json(v));
  j["vectors"] = std::move(arr);
  write_file(path, canonical_dump(j));
}

}  // namespace stealth
