#include "dse/kernel/triples.hpp"

#include <algorithm>
#include <set>

#include "dse/kernel/exprs.hpp"

namespace dse::kernel {

const char* kindName(EntityKind k) {
  switch (k) {
    case EntityKind::Machine: return "Machine";
    case EntityKind::Context: return "Context";
    case EntityKind::Variable: return "Variable";
    case EntityKind::Invariant: return "Invariant";
    case EntityKind::Event: return "Event";
    case EntityKind::Parameter: return "Parameter";
    case EntityKind::Guard: return "Guard";
    case EntityKind::Action: return "Action";
    case EntityKind::Witness: return "Witness";
    case EntityKind::CarrierSet: return "CarrierSet";
    case EntityKind::Constant: return "Constant";
  }
  return "?";
}

const char* relationName(Relation r) {
  switch (r) {
    case Relation::Refines: return "refines";
    case Relation::Sees: return "sees";
    case Relation::HasVariable: return "hasVariable";
    case Relation::HasInvariant: return "hasInvariant";
    case Relation::HasEvent: return "hasEvent";
    case Relation::HasParameter: return "hasParameter";
    case Relation::HasGuard: return "hasGuard";
    case Relation::HasAction: return "hasAction";
    case Relation::HasWitness: return "hasWitness";
    case Relation::Assigns: return "assigns";
    case Relation::RefersTo: return "refersTo";
  }
  return "?";
}

const Entity& TripleStore::entity(const std::string& id) const {
  auto it = entities_.find(id);
  if (it == entities_.end()) throw InconsistentStore("unknown entity id '" + id + "'");
  return it->second;
}

std::string TripleStore::add(Entity e) {
  if (e.id.empty()) e.id = "e" + std::to_string(next_++);
  auto id = e.id;
  entities_[id] = std::move(e);
  return id;
}

void TripleStore::relate(const std::string& s, Relation r, const std::string& o) {
  Triple t{s, r, o};
  if (std::find(triples_.begin(), triples_.end(), t) == triples_.end()) triples_.push_back(t);
}

void TripleStore::removeTriple(const Triple& t) {
  triples_.erase(std::remove(triples_.begin(), triples_.end(), t), triples_.end());
}

std::vector<std::string> TripleStore::objects(const std::string& subject, Relation r) const {
  std::vector<std::string> out;
  for (auto& t : triples_)
    if (t.subject == subject && t.relation == r) out.push_back(t.object);
  std::sort(out.begin(), out.end(), [&](auto& a, auto& b) {
    auto& ea = entity(a);
    auto& eb = entity(b);
    return ea.order != eb.order ? ea.order < eb.order : a < b;
  });
  return out;
}

std::vector<std::string> TripleStore::subjects(Relation r, const std::string& object) const {
  std::vector<std::string> out;
  for (auto& t : triples_)
    if (t.object == object && t.relation == r) out.push_back(t.subject);
  return out;
}

bool TripleStore::has(const std::string& s, Relation r, const std::string& o) const {
  return std::find(triples_.begin(), triples_.end(), Triple{s, r, o}) != triples_.end();
}

std::size_t TripleStore::count(Relation r) const {
  return std::count_if(triples_.begin(), triples_.end(), [&](auto& t) { return t.relation == r; });
}

std::vector<const Entity*> TripleStore::ofKind(EntityKind k) const {
  std::vector<const Entity*> out;
  for (auto& [id, e] : entities_)
    if (e.kind == k) out.push_back(&e);
  return out;
}

void TripleStore::refreshReferences() {
  triples_.erase(std::remove_if(triples_.begin(), triples_.end(),
                                [](auto& t) { return t.relation == Relation::RefersTo; }),
                 triples_.end());

  auto named = [&](const std::vector<std::string>& ids, const std::string& name) -> std::string {
    for (auto& id : ids)
      if (entity(id).name == name) return id;
    return {};
  };
  auto constantsOf = [&](const std::string& machine) {
    std::vector<std::string> out;
    for (auto& ctx : objects(machine, Relation::Sees))
      for (auto& [id, e] : entities_)
        if (e.kind == EntityKind::Constant && e.owner == ctx) out.push_back(id);
    return out;
  };

  auto link = [&](const std::string& subject, const std::string& machine, const std::string& event) {
    auto& e = entity(subject);
    std::set<std::string> idents;
    if (e.expr) collectIdentifiers(*e.expr, idents);
    if (e.index) collectIdentifiers(*e.index, idents);
    auto vars = objects(machine, Relation::HasVariable);
    auto params = event.empty() ? std::vector<std::string>{} : objects(event, Relation::HasParameter);
    auto consts = constantsOf(machine);
    for (auto& n : idents) {
      std::string target = named(params, n);
      if (target.empty()) target = named(vars, n);
      if (target.empty()) target = named(consts, n);
      if (!target.empty()) relate(subject, Relation::RefersTo, target);
    }
  };

  for (auto& [mid, m] : entities_) {
    if (m.kind != EntityKind::Machine) continue;
    for (auto& inv : objects(mid, Relation::HasInvariant)) link(inv, mid, {});
    for (auto& ev : objects(mid, Relation::HasEvent)) {
      for (auto r : {Relation::HasGuard, Relation::HasAction, Relation::HasWitness})
        for (auto& x : objects(ev, r)) link(x, mid, ev);
    }
  }
}

TripleStore toTriples(const Project& project) {
  TripleStore store;
  store.rootMachine = project.root;
  std::map<std::string, std::string> contextIds, machineIds;

  int order = 0;
  for (auto& ctx : project.contexts) {
    auto cid = store.add({.kind = EntityKind::Context, .name = ctx.name, .order = order++});
    contextIds[ctx.name] = cid;
    int k = 0;
    for (auto& s : ctx.sets)
      store.add({.kind = EntityKind::CarrierSet, .name = s.name, .order = k++, .owner = cid, .elements = s.elements});
    for (auto& c : ctx.constants)
      store.add({.kind = EntityKind::Constant, .name = c.name, .order = k++, .owner = cid, .type = c.type,
                 .expr = c.value});
  }
  for (auto& m : project.machines)
    machineIds[m.name] = store.add({.kind = EntityKind::Machine, .name = m.name, .order = order++});

  auto addEvent = [&](const std::string& mid, const Event& ev, int pos, bool init,
                      const std::map<std::string, std::string>& vars) {
    auto eid = store.add({.kind = EntityKind::Event, .name = ev.name, .order = pos, .flag = init});
    store.relate(mid, Relation::HasEvent, eid);
    int k = 0;
    for (auto& p : ev.parameters)
      store.relate(eid, Relation::HasParameter,
                   store.add({.kind = EntityKind::Parameter, .name = p.name, .order = k++, .type = p.type}));
    k = 0;
    for (auto& g : ev.guards)
      store.relate(eid, Relation::HasGuard,
                   store.add({.kind = EntityKind::Guard, .name = g.label, .order = k++, .expr = g.expr}));
    k = 0;
    for (auto& a : ev.actions) {
      auto aid = store.add({.kind = EntityKind::Action, .name = a.label, .order = k++, .expr = a.rhs, .index = a.index});
      store.relate(eid, Relation::HasAction, aid);
      if (auto it = vars.find(a.target); it != vars.end()) store.relate(aid, Relation::Assigns, it->second);
    }
    k = 0;
    for (auto& w : ev.witnesses)
      store.relate(eid, Relation::HasWitness,
                   store.add({.kind = EntityKind::Witness, .name = w.label, .order = k++, .expr = w.expr}));
  };

  for (auto& m : project.machines) {
    auto mid = machineIds[m.name];
    if (m.refines) store.relate(mid, Relation::Refines, machineIds.at(*m.refines));
    for (auto& s : m.sees) store.relate(mid, Relation::Sees, contextIds.at(s));
    std::map<std::string, std::string> vars;
    int k = 0;
    for (auto& v : m.variables) {
      auto vid = store.add({.kind = EntityKind::Variable, .name = v.name, .order = k++, .type = v.type, .flag = v.functional});
      vars[v.name] = vid;
      store.relate(mid, Relation::HasVariable, vid);
    }
    k = 0;
    for (auto& inv : m.invariants)
      store.relate(mid, Relation::HasInvariant,
                   store.add({.kind = EntityKind::Invariant, .name = inv.label, .order = k++, .expr = inv.expr,
                              .flag = inv.userGiven}));
    // A machine without state needs no initialisation entity.
    if (!m.variables.empty() || !m.initialisation.actions.empty())
      addEvent(mid, m.initialisation, -1, true, vars);
    k = 0;
    for (auto& ev : m.events) addEvent(mid, ev, k++, false, vars);
  }
  store.refreshReferences();
  return store;
}

Project fromTriples(const TripleStore& store) {
  Project p;
  p.root = store.rootMachine;

  auto byOrder = [&](std::vector<const Entity*> v) {
    std::sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->order != b->order ? a->order < b->order : a->id < b->id; });
    return v;
  };
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw InconsistentStore(msg);
  };

  for (auto* c : byOrder(store.ofKind(EntityKind::Context))) {
    Context ctx;
    ctx.name = c->name;
    std::vector<const Entity*> members;
    for (auto& [id, e] : store.entities())
      if ((e.kind == EntityKind::CarrierSet || e.kind == EntityKind::Constant) && e.owner == c->id) members.push_back(&e);
    for (auto* e : byOrder(members)) {
      if (e->kind == EntityKind::CarrierSet) {
        ctx.sets.push_back({e->name, e->elements});
      } else {
        require(e->type && e->expr, "constant '" + e->name + "' lacks type or value");
        ctx.constants.push_back({e->name, *e->type, *e->expr});
      }
    }
    p.contexts.push_back(std::move(ctx));
  }

  for (auto* me : byOrder(store.ofKind(EntityKind::Machine))) {
    Machine m;
    m.name = me->name;
    auto ref = store.objects(me->id, Relation::Refines);
    require(ref.size() <= 1, "machine '" + m.name + "' refines more than one machine");
    if (!ref.empty()) m.refines = store.entity(ref[0]).name;
    for (auto& c : store.objects(me->id, Relation::Sees)) m.sees.push_back(store.entity(c).name);
    for (auto& vid : store.objects(me->id, Relation::HasVariable)) {
      auto& v = store.entity(vid);
      require(v.kind == EntityKind::Variable && v.type.has_value(), "variable entity '" + vid + "' malformed");
      m.variables.push_back({v.name, *v.type, v.flag});
    }
    for (auto& iid : store.objects(me->id, Relation::HasInvariant)) {
      auto& i = store.entity(iid);
      require(i.expr.has_value(), "invariant '" + i.name + "' lacks a predicate");
      m.invariants.push_back({i.name, *i.expr, i.flag});
    }
    bool sawInit = false;
    for (auto& eid : store.objects(me->id, Relation::HasEvent)) {
      auto& ee = store.entity(eid);
      require(ee.kind == EntityKind::Event, "hasEvent target '" + eid + "' is not an event");
      Event ev;
      ev.name = ee.name;
      for (auto& x : store.objects(eid, Relation::HasParameter)) {
        auto& pe = store.entity(x);
        require(pe.type.has_value(), "parameter '" + pe.name + "' lacks a type");
        ev.parameters.push_back({pe.name, *pe.type});
      }
      for (auto& x : store.objects(eid, Relation::HasGuard)) {
        auto& g = store.entity(x);
        require(g.expr.has_value(), "guard '" + g.name + "' lacks a predicate");
        ev.guards.push_back({g.name, *g.expr});
      }
      for (auto& x : store.objects(eid, Relation::HasAction)) {
        auto& a = store.entity(x);
        auto targets = store.objects(x, Relation::Assigns);
        require(targets.size() == 1, "action '" + a.name + "' of event '" + ev.name + "' has no assigns relation");
        require(a.expr.has_value(), "action '" + a.name + "' lacks a right-hand side");
        Action act;
        act.label = a.name;
        act.target = store.entity(targets[0]).name;
        act.index = a.index;
        act.rhs = *a.expr;
        ev.actions.push_back(std::move(act));
      }
      for (auto& x : store.objects(eid, Relation::HasWitness)) {
        auto& w = store.entity(x);
        require(w.expr.has_value(), "witness '" + w.name + "' lacks a predicate");
        ev.witnesses.push_back({w.name, *w.expr});
      }
      if (ee.flag) {
        require(!sawInit, "machine '" + m.name + "' has two initialisations");
        sawInit = true;
        m.initialisation = std::move(ev);
      } else {
        m.events.push_back(std::move(ev));
      }
    }
    require(sawInit || m.variables.empty(), "machine '" + m.name + "' has no initialisation");
    if (!sawInit) m.initialisation.name = "INITIALISATION";
    p.machines.push_back(std::move(m));
  }
  return p;
}

}  // namespace dse::kernel
