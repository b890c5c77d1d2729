#include "openverse/world/document.hpp"

#include <array>
#include <charconv>
#include <sstream>

#include "openverse/error.hpp"
#include "openverse/world/json_io.hpp"

namespace openverse {

namespace {

// Networking bootstrap embedded in every document. It speaks the same wire
// schema as the server: Hello -> Welcome(snapshot), avatar EntityCreate,
// EntityUpdate at the configured rate, Ping heartbeats, and applies peer
// Create/Update/Delete/OwnershipGrant frames with last-writer-wins on seq.
constexpr std::string_view kBootstrap = R"JS((function () {
  var cfg = JSON.parse(document.getElementById('openverse-config').textContent);
  var scene = document.querySelector('a-scene');
  var session = null, seq = 0, avatarId = null, ws = null, backoff = 500;
  var remote = {};
  function send(kind, entity, s, body) {
    if (!ws || ws.readyState !== 1) return;
    ws.send(JSON.stringify({kind: kind, room: cfg.room, sender: session || '', entity: entity || '',
                            seq: s || 0, body: body || {}, ts: Date.now()}));
  }
  function fmt(c) { return c.px + ' ' + c.py + ' ' + c.pz; }
  function rot(c) { return c.rx + ' ' + c.ry + ' ' + c.rz; }
  function upsert(id, s, components) {
    if (id === avatarId) return;
    var r = remote[id];
    if (r && s <= r.seq) return;
    if (!r) {
      var el = document.querySelector('[data-entity="' + id + '"]');
      if (!el) {
        var tpl = components.template || {};
        el = document.createElement(/^a-[a-z-]+$/.test(tpl.primitive || '') ? tpl.primitive : 'a-box');
        el.setAttribute('data-entity', id);
        if (components.avatar) { el.setAttribute('color', '#7fb3d5'); el.setAttribute('height', 1.6); }
        scene.appendChild(el);
      }
      r = remote[id] = {seq: 0, el: el};
    }
    r.seq = s;
    var t = components.transform;
    if (t) { r.el.setAttribute('position', fmt(t)); r.el.setAttribute('rotation', rot(t)); }
  }
  function remove(id) {
    var r = remote[id];
    if (r && !r.el.hasAttribute('data-static')) r.el.parentNode.removeChild(r.el);
    delete remote[id];
  }
  function flatten(e) {
    var out = {};
    for (var k in e.components) out[k] = e.components[k].data;
    return out;
  }
  function onFrame(ev) {
    var m = JSON.parse(ev.data);
    if (m.kind === 'Welcome') {
      session = m.body.session; backoff = 500; avatarId = 'avatar-' + session; seq = 1;
      m.body.snapshot.entities.forEach(function (e) { upsert(e.entity_id, e.seq, flatten(e)); });
      send('EntityCreate', avatarId, seq, {persistent: false, components: {
        transform: pose(), template: {primitive: 'a-cylinder'}, avatar: {name: session}}});
    } else if (m.kind === 'Snapshot') {
      m.body.entities.forEach(function (e) { upsert(e.entity_id, e.seq, flatten(e)); });
    } else if (m.kind === 'EntityCreate') {
      upsert(m.entity, m.seq, m.body.components || {});
    } else if (m.kind === 'EntityUpdate') {
      var c = {}; c[m.body.component || 'transform'] = m.body; upsert(m.entity, m.seq, c);
    } else if (m.kind === 'EntityDelete') {
      remove(m.entity);
    } else if (m.kind === 'OwnershipGrant' && m.body.entity) {
      if (remote[m.entity]) remote[m.entity].seq = 0;
      upsert(m.entity, m.seq, flatten(m.body.entity));
    } else if (m.kind === 'Error' && m.body.code === 'VersionMismatch') {
      ws.onclose = null; ws.close();
    }
  }
  function pose() {
    var cam = document.querySelector('[camera]');
    var p = cam.object3D.getWorldPosition(new THREE.Vector3());
    var r = cam.getAttribute('rotation') || {x: 0, y: 0, z: 0};
    var n = function (d) { return ((d % 360) + 360) % 360; };
    return {px: p.x, py: p.y, pz: p.z, rx: n(r.x), ry: n(r.y), rz: n(r.z), sx: 1, sy: 1, sz: 1};
  }
  function connect() {
    ws = new WebSocket(cfg.endpoint);
    ws.onopen = function () { send('Hello', '', 0, {version: cfg.protocol}); };
    ws.onmessage = onFrame;
    ws.onclose = function () {
      session = null; setTimeout(connect, backoff); backoff = Math.min(backoff * 2, 30000);
    };
  }
  setInterval(function () {
    if (session) { var b = pose(); b.component = 'transform'; send('EntityUpdate', avatarId, ++seq, b); }
  }, 1000 / cfg.update_hz);
  setInterval(function () { if (session) send('Ping', '', 0, {}); }, cfg.heartbeat_ms);
  document.querySelectorAll('.openverse-portal').forEach(function (el) {
    el.addEventListener('click', function () {
      if (el.dataset.target === '_blank') window.open(el.dataset.href, '_blank', 'noopener');
      else window.location.href = el.dataset.href;
    });
  });
  document.querySelectorAll('[data-entity]').forEach(function (el) { el.setAttribute('data-static', ''); });
  if (scene.hasLoaded) connect(); else scene.addEventListener('loaded', connect);
})();)JS";

std::string vec3(double a, double b, double c) {
    return format_number(a) + " " + format_number(b) + " " + format_number(c);
}

// Normalized [0, 360) angles are shown in (-180, 180] so a stored 330 reads
// back as the authored -30.
double signed_degrees(double deg) {
    const double n = normalize_degrees(deg);
    return n > 180.0 ? n - 360.0 : n;
}

std::string scalar_text(const Scalar& v) {
    if (const auto* d = std::get_if<double>(&v)) return format_number(*d);
    if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    return std::get<std::string>(v);
}

std::string asset_dom_id(const std::string& asset_id) {
    return "asset-" + asset_id;
}

// Multi-property component syntax: "key: value; key: value".
std::string property_list(const FieldMap& data, std::initializer_list<std::string_view> leading) {
    std::string out;
    auto append = [&](const std::string& key, const Scalar& value) {
        if (!out.empty()) out += "; ";
        out += key + ": " + scalar_text(value);
    };
    for (auto key : leading) {
        if (auto it = data.find(std::string(key)); it != data.end()) append(it->first, it->second);
    }
    for (const auto& [key, value] : data) {
        bool seen = false;
        for (auto k : leading) seen = seen || key == k;
        if (!seen) append(key, value);
    }
    return out;
}

void attribute(std::ostringstream& out, std::string_view name, std::string_view value) {
    out << ' ' << name << "=\"" << html_escape(value) << '"';
}

bool is_tag_name(std::string_view tag) {
    return tag.starts_with("a-") && tag.size() > 2 && is_valid_component_name(tag);
}

std::string asset_element(const AssetRef& asset) {
    const std::string id = html_escape(asset_dom_id(asset.asset_id));
    const std::string src = html_escape("/assets/" + asset.path);
    if (asset.media_type.starts_with("image/")) {
        return "<img id=\"" + id + "\" src=\"" + src + "\" crossorigin=\"anonymous\">";
    }
    if (asset.media_type.starts_with("audio/")) {
        return "<audio id=\"" + id + "\" src=\"" + src + "\" preload=\"auto\"></audio>";
    }
    if (asset.media_type.starts_with("video/")) {
        return "<video id=\"" + id + "\" src=\"" + src + "\" preload=\"auto\"></video>";
    }
    return "<a-asset-item id=\"" + id + "\" src=\"" + src + "\"></a-asset-item>";
}

void emit_entity(std::ostringstream& out, const EntityRecord& entity,
                 const std::map<std::string, const AssetRef*>& assets) {
    std::string tag = "a-entity";
    const auto tmpl = entity.components.find("template");
    if (tmpl != entity.components.end()) {
        if (auto p = tmpl->second.data.find("primitive"); p != tmpl->second.data.end()) {
            if (const auto* s = std::get_if<std::string>(&p->second); s && is_tag_name(*s)) tag = *s;
        }
    }
    out << "  <" << tag;
    attribute(out, "data-entity", entity.entity_id);

    if (auto media = entity.components.find("media"); media != entity.components.end()) {
        if (auto src = media->second.data.find("src"); src != media->second.data.end()) {
            const auto& asset = *assets.at(std::get<std::string>(src->second));
            const bool model = asset.media_type.starts_with("model/");
            attribute(out, model ? "gltf-model" : "src", "#" + asset_dom_id(asset.asset_id));
        }
    }

    const Transform t = transform_of(entity);
    attribute(out, "position", vec3(t.px, t.py, t.pz));
    if (tmpl != entity.components.end()) {
        for (const auto& [key, value] : tmpl->second.data) {
            if (key != "primitive" && is_valid_component_name(key)) attribute(out, key, scalar_text(value));
        }
    }
    attribute(out, "rotation", vec3(signed_degrees(t.rx), signed_degrees(t.ry), signed_degrees(t.rz)));
    if (t.sx != 1 || t.sy != 1 || t.sz != 1) attribute(out, "scale", vec3(t.sx, t.sy, t.sz));

    for (const auto& [name, component] : entity.components) {
        if (name == kTransform || name == "template" || name == "media") continue;
        if (name == "animation") {
            attribute(out, name,
                      property_list(component.data, {"property", "from", "to", "loop", "dur", "easing"}));
        } else {
            attribute(out, name, property_list(component.data, {}));
        }
    }
    out << "></" << tag << ">\n";
}

void emit_portal(std::ostringstream& out, const Portal& portal) {
    out << "  <a-entity class=\"openverse-portal\"";
    attribute(out, "id", "portal-" + portal.portal_id);
    attribute(out, "position", vec3(portal.position.px, portal.position.py, portal.position.pz));
    attribute(out, "rotation",
              vec3(signed_degrees(portal.position.rx), signed_degrees(portal.position.ry),
                   signed_degrees(portal.position.rz)));
    attribute(out, "geometry", "primitive: torus; radius: 0.8; radiusTubular: 0.05");
    attribute(out, "material", "color: #4aa3ff; emissive: #4aa3ff");
    attribute(out, "data-href", portal.target_url);
    if (portal.open_mode == OpenMode::new_window) attribute(out, "data-target", "_blank");
    out << "></a-entity>\n";
}

bool valid_endpoint(std::string_view url, bool allow_plain) {
    std::string_view rest;
    if (url.starts_with("wss://")) {
        rest = url.substr(6);
    } else if (url.starts_with("ws://") && allow_plain) {
        rest = url.substr(5);
    } else {
        return false;
    }
    if (rest.empty() || rest.front() == '/') return false;
    for (char c : url) {
        if (c <= ' ' || c == '"' || c == '<' || c == '>' || c == '\\') return false;
    }
    return true;
}

}  // namespace

std::string format_number(double v) {
    if (v == 0.0) return "0";
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) return "0";
    return std::string(buf.data(), end);
}

std::string html_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string emit_world_document(const WorldDescription& world, std::string_view sync_endpoint,
                                ValidationOptions options) {
    if (auto violations = validate_world(world, options); !violations.empty()) {
        throw Error(ErrorCode::InvalidWorld, violations.front().path, violations.front().rule);
    }
    if (!valid_endpoint(sync_endpoint, options.allow_plain_http)) {
        throw Error(ErrorCode::InvalidWorld, "sync_endpoint",
                    "sync endpoint must be a wss:// URL (ws:// in dev mode)");
    }

    std::map<std::string, const AssetRef*> assets;
    for (const auto& a : world.assets) assets.emplace(a.asset_id, &a);

    json config = {{"endpoint", sync_endpoint}, {"room", world.world_id},
                   {"world", world.world_id},   {"protocol", kDocumentProtocolVersion},
                   {"update_hz", 10},           {"heartbeat_ms", 10000}};
    std::string config_text = config.dump();
    // Keep "</script>" out of the inline JSON.
    for (std::size_t pos = 0; (pos = config_text.find('<', pos)) != std::string::npos;) {
        config_text.replace(pos, 1, "\\u003c");
    }

    std::ostringstream out;
    out << "<!DOCTYPE html>\n"
        << "<html lang=\"en\">\n"
        << "<head>\n"
        << "<meta charset=\"utf-8\">\n"
        << "<meta name=\"viewport\" content=\"width=device-width, initial-scale=1\">\n"
        << "<title>" << html_escape(world.title) << "</title>\n"
        << "<script src=\"https://aframe.io/releases/1.5.0/aframe.min.js\"></script>\n"
        << "<script type=\"application/json\" id=\"openverse-config\">" << config_text << "</script>\n"
        << "<style>#openverse-portals{position:fixed;top:8px;left:8px;z-index:10;"
           "font:14px sans-serif}#openverse-portals a{display:block;color:#fff;"
           "background:#0008;padding:4px 8px;margin-bottom:4px}</style>\n"
        << "</head>\n"
        << "<body>\n";

    out << "<nav id=\"openverse-portals\">\n";
    for (const auto& portal : world.portals) {
        out << "  <a class=\"openverse-portal-link\"";
        attribute(out, "href", portal.target_url);
        if (portal.open_mode == OpenMode::new_window) {
            attribute(out, "target", "_blank");
            attribute(out, "rel", "noopener");
        }
        out << '>' << html_escape(portal.portal_id) << "</a>\n";
    }
    out << "</nav>\n";

    out << "<a-scene>\n";
    if (!world.assets.empty()) {
        out << "  <a-assets>\n";
        for (const auto& a : world.assets) out << "    " << asset_element(a) << '\n';
        out << "  </a-assets>\n";
    }
    out << "  <a-entity id=\"openverse-rig\"";
    attribute(out, "position", vec3(world.spawn.px, world.spawn.py, world.spawn.pz));
    attribute(out, "rotation",
              vec3(signed_degrees(world.spawn.rx), signed_degrees(world.spawn.ry),
                   signed_degrees(world.spawn.rz)));
    out << "><a-entity camera look-controls wasd-controls position=\"0 0 0\"></a-entity></a-entity>\n";
    for (const auto& entity : world.static_entities) emit_entity(out, entity, assets);
    for (const auto& portal : world.portals) emit_portal(out, portal);
    out << "</a-scene>\n";

    out << "<script>\n" << kBootstrap << "\n</script>\n"
        << "</body>\n"
        << "</html>\n";
    return out.str();
}

}  // namespace openverse
