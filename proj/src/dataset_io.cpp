#include "ltt/dataset_io.hpp"

#include "ltt/errors.hpp"

#include <fstream>
#include <stdexcept>

namespace ltt {

nlohmann::json params_to_json(const ModelParams& p) {
  nlohmann::json j;
  j["prior"] = to_string(p.prior);
  j["gamma"] = p.gamma;
  j["h"] = p.h;
  j["m"] = p.m;
  j["d"] = p.d;
  j["c"] = p.c();
  j["q"] = p.q;
  j["v"] = std::vector<double>(p.v.data(), p.v.data() + p.v.size());
  return j;
}

ModelParams params_from_json(const nlohmann::json& j) {
  ModelParams p;
  p.prior = parse_prior(j.at("prior").get<std::string>());
  p.gamma = j.at("gamma").get<double>();
  p.h = j.at("h").get<double>();
  p.m = j.at("m").get<std::size_t>();
  p.d = j.at("d").get<std::size_t>();
  p.q = j.at("q").get<double>();
  const auto v = j.at("v").get<std::vector<double>>();
  p.v = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  p.validate();
  return p;
}

void dump_dataset(const Dataset& data, const std::string& stem) {
  std::ofstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + stem + ".bin for writing");
  bin.write(reinterpret_cast<const char*>(data.X.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(data.X.size())));
  nlohmann::json side;
  side["params"] = params_to_json(data.params);
  side["rows"] = data.m();
  side["cols"] = data.d();
  side["labels"] = data.labels;
  side["coef"] = std::vector<double>(data.coef.data(), data.coef.data() + data.coef.size());
  std::ofstream js(stem + ".json");
  if (!js) throw std::runtime_error("cannot open " + stem + ".json for writing");
  js << side.dump(2) << '\n';
}

Dataset load_dataset(const std::string& stem) {
  std::ifstream js(stem + ".json");
  if (!js) throw std::runtime_error("cannot open " + stem + ".json");
  const nlohmann::json side = nlohmann::json::parse(js);
  Dataset data;
  data.params = params_from_json(side.at("params"));
  const auto rows = side.at("rows").get<Eigen::Index>();
  const auto cols = side.at("cols").get<Eigen::Index>();
  data.labels = side.at("labels").get<std::vector<std::uint8_t>>();
  const auto coef = side.at("coef").get<std::vector<double>>();
  data.coef = Eigen::Map<const Vector>(coef.data(), static_cast<Eigen::Index>(coef.size()));
  data.X.resize(rows, cols);
  std::ifstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + stem + ".bin");
  bin.read(reinterpret_cast<char*>(data.X.data()),
           static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(data.X.size())));
  if (!bin) throw std::runtime_error(stem + ".bin is shorter than the sidecar claims");
  return data;
}

}  // namespace ltt
