#include "gopt/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gopt {

TypeConstraint TypeConstraint::basic(std::string name) {
  TypeConstraint c;
  c.kind_ = Kind::Basic;
  c.names_.insert(std::move(name));
  return c;
}

TypeConstraint TypeConstraint::of(std::set<std::string> names) {
  TypeConstraint c;
  c.kind_ = names.size() == 1 ? Kind::Basic : Kind::Union;
  c.names_ = std::move(names);
  return c;
}

std::set<std::string> TypeConstraint::resolve(
    const std::set<std::string>& universe) const {
  if (is_all()) return universe;
  return names_;
}

TypeConstraint TypeConstraint::intersect(const TypeConstraint& o) const {
  if (is_all()) return o;
  if (o.is_all()) return *this;
  std::set<std::string> out;
  std::set_intersection(names_.begin(), names_.end(), o.names_.begin(),
                        o.names_.end(), std::inserter(out, out.begin()));
  return TypeConstraint::of(std::move(out));
}

std::string TypeConstraint::to_string() const {
  if (is_all()) return "*";
  std::string s;
  for (const auto& n : names_) {
    if (!s.empty()) s += "|";
    s += n;
  }
  return s.empty() ? "<none>" : s;
}

void GraphSchema::add_vertex_type(
    const std::string& name,
    const std::map<std::string, PropertyValue::Kind>& props) {
  vertex_types_.insert(name);
  if (!props.empty()) vertex_props_[name] = props;
}

void GraphSchema::add_edge_triplet(
    const EdgeTriplet& t,
    const std::map<std::string, PropertyValue::Kind>& props) {
  if (!has_vertex_type(t.src_type))
    throw GraphError("edge triplet " + t.to_string() +
                     " references unknown src type " + t.src_type);
  if (!has_vertex_type(t.dst_type))
    throw GraphError("edge triplet " + t.to_string() +
                     " references unknown dst type " + t.dst_type);
  if (vertex_types_.count(t.edge_type))
    throw GraphError("edge type name collides with vertex type: " +
                     t.edge_type);
  triplets_.insert(t);
  if (!props.empty()) edge_props_[t.edge_type] = props;
}

std::set<std::string> GraphSchema::edge_type_names() const {
  std::set<std::string> names;
  for (const auto& t : triplets_) names.insert(t.edge_type);
  return names;
}

bool GraphSchema::has_edge_type(const std::string& t) const {
  return std::any_of(triplets_.begin(), triplets_.end(),
                     [&](const EdgeTriplet& e) { return e.edge_type == t; });
}

std::vector<EdgeTriplet> GraphSchema::adjacent_triplets(const std::string& t,
                                                        Direction dir) const {
  std::vector<EdgeTriplet> out;
  for (const auto& trip : triplets_) {
    if (dir == Direction::Out ? trip.src_type == t : trip.dst_type == t)
      out.push_back(trip);
  }
  return out;
}

const std::map<std::string, PropertyValue::Kind>* GraphSchema::vertex_props(
    const std::string& type) const {
  auto it = vertex_props_.find(type);
  return it == vertex_props_.end() ? nullptr : &it->second;
}

const std::map<std::string, PropertyValue::Kind>* GraphSchema::edge_props(
    const std::string& type) const {
  auto it = edge_props_.find(type);
  return it == edge_props_.end() ? nullptr : &it->second;
}

SchemaNeighborhood schema_adjacent_types(const GraphSchema& schema,
                                         const std::string& t, Direction dir) {
  if (!schema.has_vertex_type(t))
    throw GraphError("unknown vertex type: " + t);
  SchemaNeighborhood n;
  for (const auto& trip : schema.adjacent_triplets(t, dir)) {
    n.triplets.insert(trip);
    n.vertex_types.insert(dir == Direction::Out ? trip.dst_type
                                                : trip.src_type);
  }
  return n;
}

void DataGraph::add_vertex(int64_t id, std::string type, PropertyMap props) {
  if (finalized_) throw GraphError("graph is immutable after finalize");
  if (vertices_.count(id))
    throw GraphError("duplicate vertex id " + std::to_string(id));
  vertices_[id] = Vertex{id, std::move(type), std::move(props), {}, {}};
}

void DataGraph::add_edge(int64_t id, int64_t src, int64_t dst,
                         std::string type, PropertyMap props) {
  if (finalized_) throw GraphError("graph is immutable after finalize");
  if (edges_.count(id))
    throw GraphError("duplicate edge id " + std::to_string(id));
  edges_[id] = Edge{id, src, dst, std::move(type), std::move(props)};
}

void DataGraph::finalize() {
  for (const auto& [eid, e] : edges_) {
    auto src = vertices_.find(e.src);
    auto dst = vertices_.find(e.dst);
    if (src == vertices_.end())
      throw GraphError("edge " + std::to_string(eid) +
                       " references missing vertex " + std::to_string(e.src));
    if (dst == vertices_.end())
      throw GraphError("edge " + std::to_string(eid) +
                       " references missing vertex " + std::to_string(e.dst));
    src->second.out_edges.push_back(eid);
    dst->second.in_edges.push_back(eid);
  }
  finalized_ = true;
}

const Vertex& DataGraph::vertex(int64_t id) const {
  auto it = vertices_.find(id);
  if (it == vertices_.end())
    throw GraphError("unknown vertex id " + std::to_string(id));
  return it->second;
}

const Edge& DataGraph::edge(int64_t id) const {
  auto it = edges_.find(id);
  if (it == edges_.end())
    throw GraphError("unknown edge id " + std::to_string(id));
  return it->second;
}

const PropertyValue* DataGraph::vertex_prop(int64_t id,
                                            const std::string& name) const {
  const Vertex& v = vertex(id);
  auto it = v.props.find(name);
  return it == v.props.end() ? nullptr : &it->second;
}

const PropertyValue* DataGraph::edge_prop(int64_t id,
                                          const std::string& name) const {
  const Edge& e = edge(id);
  auto it = e.props.find(name);
  return it == e.props.end() ? nullptr : &it->second;
}

int64_t TypeFrequencyTable::vertex_freq(const std::string& type) const {
  auto it = vertex_counts.find(type);
  return it == vertex_counts.end() ? 0 : it->second;
}

int64_t TypeFrequencyTable::edge_name_freq(const std::string& name) const {
  int64_t total = 0;
  for (const auto& [t, c] : triplet_counts)
    if (t.edge_type == name) total += c;
  return total;
}

int64_t TypeFrequencyTable::triplet_freq(const EdgeTriplet& t) const {
  auto it = triplet_counts.find(t);
  return it == triplet_counts.end() ? 0 : it->second;
}

int64_t TypeFrequencyTable::total_vertices() const {
  int64_t total = 0;
  for (const auto& [t, c] : vertex_counts) total += c;
  return total;
}

int64_t TypeFrequencyTable::total_edges() const {
  int64_t total = 0;
  for (const auto& [t, c] : triplet_counts) total += c;
  return total;
}

namespace {

using nlohmann::json;

PropertyValue prop_from_json(const json& j) {
  if (j.is_number_integer()) return PropertyValue(j.get<int64_t>());
  if (j.is_number_float()) return PropertyValue(j.get<double>());
  if (j.is_string()) return PropertyValue(j.get<std::string>());
  if (j.is_boolean()) return PropertyValue(j.get<bool>());
  if (j.is_array()) {
    PropertyValue::List l;
    for (const auto& item : j) l.push_back(prop_from_json(item));
    return PropertyValue(std::move(l));
  }
  throw GraphError("unsupported property JSON value: " + j.dump());
}

PropertyMap props_from_json(const json& j) {
  PropertyMap m;
  if (j.is_null()) return m;
  for (auto it = j.begin(); it != j.end(); ++it)
    m.emplace(it.key(), prop_from_json(it.value()));
  return m;
}

void check_props_against_decl(
    const PropertyMap& props,
    const std::map<std::string, PropertyValue::Kind>* decl,
    const std::string& what) {
  if (!decl) return;
  for (const auto& [name, value] : props) {
    auto it = decl->find(name);
    if (it != decl->end() && it->second != value.kind())
      throw GraphError(what + ": property '" + name + "' expected " +
                       to_string(it->second) + ", got " +
                       to_string(value.kind()));
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

DataGraph graph_from_json_text(const std::string& text,
                               const GraphSchema* schema) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw GraphError(std::string("graph JSON parse error: ") + e.what());
  }
  DataGraph g;
  for (const auto& jv : j.value("vertices", json::array())) {
    PropertyMap props = props_from_json(jv.value("props", json()));
    std::string type = jv.at("type").get<std::string>();
    if (schema) {
      if (!schema->has_vertex_type(type))
        throw GraphError("vertex type not in schema: " + type);
      check_props_against_decl(props, schema->vertex_props(type),
                               "vertex " + std::to_string(jv.at("id").get<int64_t>()));
    }
    g.add_vertex(jv.at("id").get<int64_t>(), type, std::move(props));
  }
  for (const auto& je : j.value("edges", json::array())) {
    PropertyMap props = props_from_json(je.value("props", json()));
    std::string type = je.at("type").get<std::string>();
    if (schema) {
      check_props_against_decl(props, schema->edge_props(type),
                               "edge " + std::to_string(je.at("id").get<int64_t>()));
    }
    g.add_edge(je.at("id").get<int64_t>(), je.at("src").get<int64_t>(),
               je.at("dst").get<int64_t>(), type, std::move(props));
  }
  g.finalize();
  if (schema) {
    for (const auto& [eid, e] : g.edges()) {
      EdgeTriplet t{g.vertex(e.src).type, e.type, g.vertex(e.dst).type};
      if (!schema->edge_triplets().count(t))
        throw GraphError("edge " + std::to_string(eid) +
                         " has triplet not in schema: " + t.to_string());
    }
  }
  return g;
}

DataGraph load_graph(const std::string& path, const GraphSchema* schema) {
  return graph_from_json_text(slurp(path), schema);
}

GraphSchema schema_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw GraphError(std::string("schema JSON parse error: ") + e.what());
  }
  GraphSchema s;
  for (const auto& jv : j.value("vertex_types", json::array())) {
    std::map<std::string, PropertyValue::Kind> props;
    if (jv.contains("props")) {
      for (const auto& [name, kind] : jv.at("props").items())
        props[name] = value_kind_from_string(kind.get<std::string>());
    }
    s.add_vertex_type(jv.at("name").get<std::string>(), props);
  }
  for (const auto& je : j.value("edge_types", json::array())) {
    std::map<std::string, PropertyValue::Kind> props;
    if (je.contains("props")) {
      for (const auto& [name, kind] : je.at("props").items())
        props[name] = value_kind_from_string(kind.get<std::string>());
    }
    s.add_edge_triplet(EdgeTriplet{je.at("src").get<std::string>(),
                                   je.at("name").get<std::string>(),
                                   je.at("dst").get<std::string>()},
                       props);
  }
  return s;
}

GraphSchema load_schema(const std::string& path) {
  return schema_from_json_text(slurp(path));
}

GraphSchema extract_schema(const DataGraph& graph) {
  GraphSchema s;
  for (const auto& [id, v] : graph.vertices()) s.add_vertex_type(v.type);
  for (const auto& [id, e] : graph.edges()) {
    s.add_edge_triplet(EdgeTriplet{graph.vertex(e.src).type, e.type,
                                   graph.vertex(e.dst).type});
  }
  return s;
}

TypeFrequencyTable type_frequencies(const DataGraph& graph) {
  TypeFrequencyTable t;
  for (const auto& [id, v] : graph.vertices()) ++t.vertex_counts[v.type];
  for (const auto& [id, e] : graph.edges()) {
    EdgeTriplet trip{graph.vertex(e.src).type, e.type,
                     graph.vertex(e.dst).type};
    ++t.triplet_counts[trip];
  }
  return t;
}

}  // namespace gopt
