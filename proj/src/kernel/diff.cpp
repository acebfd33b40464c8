#include "dse/kernel/diff.hpp"

#include <algorithm>
#include <stdexcept>

#include "dse/kernel/hash.hpp"

namespace dse::kernel {

const char* kindName(Edit::Kind k) {
  switch (k) {
    case Edit::Kind::Add: return "add";
    case Edit::Kind::Remove: return "remove";
    case Edit::Kind::Modify: return "modify";
  }
  return "?";
}

const char* targetName(Edit::Target t) {
  switch (t) {
    case Edit::Target::Root: return "Root";
    case Edit::Target::Context: return "Context";
    case Edit::Target::Machine: return "Machine";
    case Edit::Target::MachineHeader: return "MachineHeader";
    case Edit::Target::Variable: return "Variable";
    case Edit::Target::Invariant: return "Invariant";
    case Edit::Target::Event: return "Event";
  }
  return "?";
}

std::string Edit::describe() const {
  std::string out = std::string(kindName(kind)) + " " + targetName(target) + " " + name;
  if (!machine.empty()) out += " in " + machine;
  return out;
}

namespace {

template <class T, class Key, class Same, class Emit>
void diffNamed(const std::vector<T>& a, const std::vector<T>& b, Key key, Same same, Emit emit) {
  for (auto& x : a) {
    auto it = std::find_if(b.begin(), b.end(), [&](auto& y) { return key(y) == key(x); });
    if (it == b.end()) emit(Edit::Kind::Remove, x);
  }
  for (auto& y : b) {
    auto it = std::find_if(a.begin(), a.end(), [&](auto& x) { return key(x) == key(y); });
    if (it == a.end())
      emit(Edit::Kind::Add, y);
    else if (!same(*it, y))
      emit(Edit::Kind::Modify, y);
  }
}

bool sameInvariant(const Invariant& a, const Invariant& b) {
  return a.userGiven == b.userGiven && canonicalForm(a.expr) == canonicalForm(b.expr);
}

}  // namespace

EditScript diff(const Project& a, const Project& b) {
  EditScript script;
  if (a.root != b.root) script.push_back({Edit::Kind::Modify, Edit::Target::Root, {}, b.root, b.root});

  diffNamed(
      a.contexts, b.contexts, [](auto& c) { return c.name; },
      [](auto& x, auto& y) { return canonicalForm(x) == canonicalForm(y); },
      [&](Edit::Kind k, const Context& c) {
        Edit e{k, Edit::Target::Context, {}, c.name};
        if (k != Edit::Kind::Remove) e.payload = c;
        script.push_back(std::move(e));
      });

  for (auto& ma : a.machines)
    if (!b.findMachine(ma.name)) script.push_back({Edit::Kind::Remove, Edit::Target::Machine, {}, ma.name});
  for (auto& mb : b.machines) {
    auto* ma = a.findMachine(mb.name);
    if (!ma) {
      script.push_back({Edit::Kind::Add, Edit::Target::Machine, {}, mb.name, mb});
      continue;
    }
    auto sortedSees = [](std::vector<std::string> s) {
      std::sort(s.begin(), s.end());
      return s;
    };
    if (ma->refines != mb.refines || sortedSees(ma->sees) != sortedSees(mb.sees)) {
      Machine header;
      header.name = mb.name;
      header.refines = mb.refines;
      header.sees = mb.sees;
      script.push_back({Edit::Kind::Modify, Edit::Target::MachineHeader, mb.name, mb.name, header});
    }
    auto emitter = [&](Edit::Target t, auto nameOf) {
      return [&, t, nameOf](Edit::Kind k, const auto& x) {
        Edit e{k, t, mb.name, nameOf(x)};
        if (k != Edit::Kind::Remove) e.payload = x;
        script.push_back(std::move(e));
      };
    };
    auto varName = [](const Variable& v) { return v.name; };
    auto invName = [](const Invariant& i) { return i.label; };
    auto evName = [](const Event& e) { return e.name; };
    diffNamed(ma->variables, mb.variables, varName, [](auto& x, auto& y) { return x == y; },
              emitter(Edit::Target::Variable, varName));
    diffNamed(ma->invariants, mb.invariants, invName, sameInvariant, emitter(Edit::Target::Invariant, invName));
    std::vector<Event> ea{ma->initialisation}, eb{mb.initialisation};
    ea.insert(ea.end(), ma->events.begin(), ma->events.end());
    eb.insert(eb.end(), mb.events.begin(), mb.events.end());
    diffNamed(ea, eb, evName, [](auto& x, auto& y) { return canonicalForm(x) == canonicalForm(y); },
              emitter(Edit::Target::Event, evName));
  }
  return script;
}

namespace {

template <class T, class Key>
void upsert(std::vector<T>& xs, const std::string& name, const T* value, Key key) {
  auto it = std::find_if(xs.begin(), xs.end(), [&](auto& x) { return key(x) == name; });
  if (!value) {
    if (it != xs.end()) xs.erase(it);
  } else if (it == xs.end()) {
    xs.push_back(*value);
  } else {
    *it = *value;
  }
}

}  // namespace

Project applyEdits(const Project& a, const EditScript& script) {
  Project p = a;
  for (auto& e : script) {
    bool removing = e.kind == Edit::Kind::Remove;
    switch (e.target) {
      case Edit::Target::Root:
        p.root = std::get<std::string>(e.payload);
        break;
      case Edit::Target::Context:
        upsert(p.contexts, e.name, removing ? nullptr : &std::get<Context>(e.payload), [](auto& c) { return c.name; });
        break;
      case Edit::Target::Machine:
        upsert(p.machines, e.name, removing ? nullptr : &std::get<Machine>(e.payload), [](auto& m) { return m.name; });
        break;
      default: {
        auto* m = p.findMachine(e.machine);
        if (!m) throw std::invalid_argument("edit refers to unknown machine '" + e.machine + "'");
        if (e.target == Edit::Target::MachineHeader) {
          auto& h = std::get<Machine>(e.payload);
          m->refines = h.refines;
          m->sees = h.sees;
        } else if (e.target == Edit::Target::Variable) {
          upsert(m->variables, e.name, removing ? nullptr : &std::get<Variable>(e.payload), [](auto& v) { return v.name; });
        } else if (e.target == Edit::Target::Invariant) {
          upsert(m->invariants, e.name, removing ? nullptr : &std::get<Invariant>(e.payload), [](auto& i) { return i.label; });
        } else if (m->initialisation.name == e.name) {
          if (!removing) m->initialisation = std::get<Event>(e.payload);
        } else {
          upsert(m->events, e.name, removing ? nullptr : &std::get<Event>(e.payload), [](auto& v) { return v.name; });
        }
      }
    }
  }
  return p;
}

}  // namespace dse::kernel
