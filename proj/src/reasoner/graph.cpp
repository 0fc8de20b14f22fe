#include <algorithm>

#include "cairo/reasoner/reasoner.hpp"

namespace cairo {

namespace {

const QName kAbsentIn{"traf", "absent_in"};

template <typename T>
const T& empty_of() {
  static const T e;
  return e;
}

}  // namespace

std::string format_value(const Value& v) {
  if (auto* q = std::get_if<QName>(&v)) return q->str();
  return std::get<DataValue>(v).literal();
}

void MaterializedGraph::insert(const Assertion& a) {
  if (!keys_.insert(make_assertion_key(a)).second) return;
  facts_.push_back(a);
  if (auto* c = std::get_if<ClassAssertion>(&a)) {
    individuals_.insert(c->individual);
    members_[c->concept_name].insert(c->individual);
    memberships_[c->individual].insert(c->concept_name);
    return;
  }
  const auto& r = std::get<RoleAssertion>(a);
  individuals_.insert(r.subject);
  if (r.is_object()) {
    const QName& o = r.object_name();
    individuals_.insert(o);
    object_pairs_[r.role].insert({r.subject, o});
    succ_[r.role][r.subject].insert(o);
    pred_[r.role][o].insert(r.subject);
  } else {
    data_values_.insert(r.literal());
    data_pairs_[r.role].push_back({r.subject, r.literal()});
    data_by_subject_[r.role][r.subject].push_back(r.literal());
  }
}

MaterializedGraph MaterializedGraph::realize(const std::vector<Assertion>& assertions, const TBox& tbox,
                                             const std::set<QName>& domain, const std::set<QName>& context) {
  MaterializedGraph g;
  g.tbox_ = &tbox;
  g.domain_ = domain;
  g.context_ = context;
  g.individuals_.insert(domain.begin(), domain.end());
  g.individuals_.insert(context.begin(), context.end());
  std::vector<Assertion> closed;
  for (const auto& a : assertions) {
    g.asserted_.insert(make_assertion_key(a));
    if (auto* c = std::get_if<ClassAssertion>(&a)) {
      for (const auto& anc : tbox.ancestors(c->concept_name)) closed.push_back(ClassAssertion{c->individual, anc});
    } else {
      const auto& r = std::get<RoleAssertion>(a);
      for (const auto& sup : tbox.role_ancestors(r.role)) closed.push_back(RoleAssertion{r.subject, sup, r.object});
    }
  }
  canonicalize(closed);
  for (const auto& a : closed) g.insert(a);
  return g;
}

const std::set<QName>& MaterializedGraph::members(const QName& concept_name) const {
  auto it = members_.find(concept_name);
  return it == members_.end() ? empty_of<std::set<QName>>() : it->second;
}

const std::set<QName>& MaterializedGraph::memberships(const QName& individual) const {
  auto it = memberships_.find(individual);
  return it == memberships_.end() ? empty_of<std::set<QName>>() : it->second;
}

bool MaterializedGraph::is_member(const QName& individual, const QName& concept_name) const {
  return members(concept_name).count(individual) > 0;
}

const std::set<std::pair<QName, QName>>& MaterializedGraph::object_pairs(const QName& role) const {
  auto it = object_pairs_.find(role);
  return it == object_pairs_.end() ? empty_of<std::set<std::pair<QName, QName>>>() : it->second;
}

const std::set<QName>& MaterializedGraph::successors(const QName& role, const QName& subject) const {
  auto it = succ_.find(role);
  if (it == succ_.end()) return empty_of<std::set<QName>>();
  auto jt = it->second.find(subject);
  return jt == it->second.end() ? empty_of<std::set<QName>>() : jt->second;
}

const std::set<QName>& MaterializedGraph::predecessors(const QName& role, const QName& object) const {
  auto it = pred_.find(role);
  if (it == pred_.end()) return empty_of<std::set<QName>>();
  auto jt = it->second.find(object);
  return jt == it->second.end() ? empty_of<std::set<QName>>() : jt->second;
}

const std::vector<std::pair<QName, DataValue>>& MaterializedGraph::data_pairs(const QName& role) const {
  auto it = data_pairs_.find(role);
  return it == data_pairs_.end() ? empty_of<std::vector<std::pair<QName, DataValue>>>() : it->second;
}

const std::vector<DataValue>& MaterializedGraph::data_values(const QName& role, const QName& subject) const {
  auto it = data_by_subject_.find(role);
  if (it == data_by_subject_.end()) return empty_of<std::vector<DataValue>>();
  auto jt = it->second.find(subject);
  return jt == it->second.end() ? empty_of<std::vector<DataValue>>() : jt->second;
}

MaterializedGraph realize(const Scene& scene, const TBox& tbox) {
  std::set<QName> domain;
  for (const auto& ind : scene.individuals) domain.insert(ind.id);
  return MaterializedGraph::realize(scene.assertions, tbox, domain, {scene.id});
}

std::vector<Assertion> scenario_assertions(const Scenario& scenario, const TBox& tbox) {
  std::vector<Assertion> out;
  for (std::size_t i = 0; i < scenario.scenes.size(); ++i) {
    const Scene& scene = scenario.scenes[i];
    std::map<QName, QName> rename;
    for (const auto& ind : scene.individuals) {
      if (!ind.track_id) continue;
      auto it = scenario.tracks.track_individuals.find(*ind.track_id);
      if (it != scenario.tracks.track_individuals.end()) rename[ind.id] = it->second;
    }
    auto map_name = [&](const QName& q) {
      auto it = rename.find(q);
      return it == rename.end() ? q : it->second;
    };
    for (const auto& a : scene.assertions) {
      if (auto* c = std::get_if<ClassAssertion>(&a)) {
        out.push_back(ClassAssertion{map_name(c->individual), c->concept_name});
      } else {
        RoleAssertion r = std::get<RoleAssertion>(a);
        r.subject = map_name(r.subject);
        if (r.is_object()) r.object = map_name(r.object_name());
        out.push_back(std::move(r));
      }
    }
  }
  if (tbox.role(kAbsentIn)) {
    for (const auto& [track, slots] : scenario.tracks.tracks) {
      auto name = scenario.tracks.track_individuals.find(track);
      if (name == scenario.tracks.track_individuals.end()) continue;
      for (std::size_t i = 0; i < slots.size() && i < scenario.scenes.size(); ++i)
        if (!slots[i]) out.push_back(RoleAssertion{name->second, kAbsentIn, scenario.scenes[i].id});
    }
  }
  canonicalize(out);
  return out;
}

MaterializedGraph realize(const Scenario& scenario, const TBox& tbox) {
  std::set<QName> domain, context;
  for (const auto& [_, name] : scenario.tracks.track_individuals) domain.insert(name);
  for (const auto& s : scenario.scenes) context.insert(s.id);
  return MaterializedGraph::realize(scenario_assertions(scenario, tbox), tbox, domain, context);
}

}  // namespace cairo
