#pragma once

#include "tddr/container.hpp"
#include "tddr/generator.hpp"
#include "tddr/latents.hpp"
#include "tddr/recon_common.hpp"

namespace tddr {

inline NamedTensor tensor_entry(const std::string& name, const Tensor& t) {
    NamedTensor nt;
    nt.name = name;
    nt.dtype = "f64";
    nt.shape = t.shape;
    nt.f64 = t.data;
    return nt;
}

inline Tensor tensor_from_entry(const NamedTensor& nt) {
    if (nt.dtype != "f64") throw io_error("expected f64 tensor '" + nt.name + "'");
    return Tensor(nt.shape, nt.f64);
}

inline NamedTensor cimage_entry(const std::string& name, const CImage& img) {
    NamedTensor nt;
    nt.name = name;
    nt.dtype = "c128";
    nt.shape = {img.n, img.n};
    nt.f64.reserve(img.v.size() * 2);
    for (const cplx& z : img.v) {
        nt.f64.push_back(z.real());
        nt.f64.push_back(z.imag());
    }
    return nt;
}

inline CImage cimage_from_entry(const NamedTensor& nt) {
    if (nt.dtype != "c128" || nt.shape.size() != 2 || nt.shape[0] != nt.shape[1])
        throw io_error("expected square c128 image '" + nt.name + "'");
    CImage img(nt.shape[0]);
    for (size_t i = 0; i < img.v.size(); ++i) img.v[i] = cplx(nt.f64[2 * i], nt.f64[2 * i + 1]);
    return img;
}

inline NamedTensor real_vector_entry(const std::string& name, const std::vector<double>& v) {
    NamedTensor nt;
    nt.name = name;
    nt.dtype = "f64";
    nt.shape = {static_cast<int>(v.size())};
    nt.f64 = v;
    return nt;
}

// ---- FrameSeries ----

inline void series_to_container(const FrameSeries& s, Container& c, const std::string& prefix = "") {
    c.meta.emplace_back(prefix + "frames", std::to_string(s.count()));
    c.meta.emplace_back(prefix + "dt", std::to_string(s.dt));
    for (int k = 0; k < s.count(); ++k) {
        char name[64];
        std::snprintf(name, sizeof(name), "%sframe.%04d", prefix.c_str(), k);
        c.tensors.push_back(cimage_entry(name, s.frames[k]));
    }
}

inline FrameSeries series_from_container(const Container& c, const std::string& prefix = "") {
    FrameSeries s;
    const int count = std::stoi(c.meta_value(prefix + "frames", "0"));
    s.dt = std::stod(c.meta_value(prefix + "dt", "1"));
    for (int k = 0; k < count; ++k) {
        char name[64];
        std::snprintf(name, sizeof(name), "%sframe.%04d", prefix.c_str(), k);
        s.frames.push_back(cimage_from_entry(c.get(name)));
        s.n = s.frames.back().n;
    }
    return s;
}

// ---- CoilMaps ----

inline void coils_to_container(const CoilMaps& cm, Container& c) {
    c.meta.emplace_back("coils", std::to_string(cm.count()));
    for (int i = 0; i < cm.count(); ++i)
        c.tensors.push_back(cimage_entry("coil." + std::to_string(i), cm.maps[i]));
}

inline CoilMaps coils_from_container(const Container& c) {
    CoilMaps cm;
    const int count = std::stoi(c.meta_value("coils", "0"));
    for (int i = 0; i < count; ++i) {
        cm.maps.push_back(cimage_from_entry(c.get("coil." + std::to_string(i))));
        cm.n = cm.maps.back().n;
    }
    return cm;
}

// ---- SpokeStream: per-spoke records (index, angle, coils x m_omega samples) ----

inline void stream_to_container(const SpokeStream& s, Container& c) {
    c.meta.emplace_back("traj.theta0", std::to_string(s.traj.theta0));
    c.meta.emplace_back("traj.dtheta", std::to_string(s.traj.dtheta));
    c.meta.emplace_back("traj.dt", std::to_string(s.traj.dt));
    c.meta.emplace_back("traj.n_image", std::to_string(s.traj.n_image));
    c.meta.emplace_back("traj.m_omega", std::to_string(s.traj.m_omega));
    c.meta.emplace_back("stream.coils", std::to_string(s.coils));
    c.meta.emplace_back("stream.spokes", std::to_string(s.count()));
    std::vector<double> angles;
    for (const Spoke& sp : s.spokes) angles.push_back(sp.angle);
    c.tensors.push_back(real_vector_entry("spoke.angles", angles));
    for (int k = 0; k < s.count(); ++k) {
        NamedTensor nt;
        char name[64];
        std::snprintf(name, sizeof(name), "spoke.%05d", k);
        nt.name = name;
        nt.dtype = "c128";
        nt.shape = {s.coils, s.traj.m_omega};
        nt.f64.reserve(s.spokes[k].samples.size() * 2);
        for (const cplx& z : s.spokes[k].samples) {
            nt.f64.push_back(z.real());
            nt.f64.push_back(z.imag());
        }
        c.tensors.push_back(std::move(nt));
    }
}

inline SpokeStream stream_from_container(const Container& c) {
    SpokeStream s;
    s.traj.theta0 = std::stod(c.meta_value("traj.theta0", "0"));
    s.traj.dtheta = std::stod(c.meta_value("traj.dtheta", "0"));
    s.traj.dt = std::stod(c.meta_value("traj.dt", "1"));
    s.traj.n_image = std::stoi(c.meta_value("traj.n_image", "0"));
    s.traj.m_omega = std::stoi(c.meta_value("traj.m_omega", "0"));
    s.coils = std::stoi(c.meta_value("stream.coils", "1"));
    const int count = std::stoi(c.meta_value("stream.spokes", "0"));
    const NamedTensor& angles = c.get("spoke.angles");
    for (int k = 0; k < count; ++k) {
        char name[64];
        std::snprintf(name, sizeof(name), "spoke.%05d", k);
        const NamedTensor& nt = c.get(name);
        Spoke sp;
        sp.index = k;
        sp.angle = angles.f64[k];
        sp.samples.resize(nt.f64.size() / 2);
        for (size_t i = 0; i < sp.samples.size(); ++i)
            sp.samples[i] = cplx(nt.f64[2 * i], nt.f64[2 * i + 1]);
        s.spokes.push_back(std::move(sp));
    }
    s.validate();
    return s;
}

// ---- Generator checkpoint + latent schedule ----

inline void generator_to_container(const GeneratorParams& p, Container& c) {
    c.meta.emplace_back("gen.latent_hw", std::to_string(p.cfg.latent_hw));
    c.meta.emplace_back("gen.latent_ch", std::to_string(p.cfg.latent_ch));
    c.meta.emplace_back("gen.stages", std::to_string(p.cfg.stages));
    c.meta.emplace_back("gen.channels", std::to_string(p.cfg.channels));
    const auto tensors = p.tensors();
    const auto names = p.tensor_names();
    for (size_t i = 0; i < tensors.size(); ++i)
        c.tensors.push_back(tensor_entry("param." + names[i], *tensors[i]));
}

inline GeneratorParams generator_from_container(const Container& c) {
    GeneratorConfig cfg;
    cfg.latent_hw = std::stoi(c.meta_value("gen.latent_hw", "8"));
    cfg.latent_ch = std::stoi(c.meta_value("gen.latent_ch", "1"));
    cfg.stages = std::stoi(c.meta_value("gen.stages", "4"));
    cfg.channels = std::stoi(c.meta_value("gen.channels", "128"));
    GeneratorParams p = init_generator(cfg, 0);
    const auto names = p.tensor_names();
    auto tensors = p.tensors();
    for (size_t i = 0; i < tensors.size(); ++i) *tensors[i] = tensor_from_entry(c.get("param." + names[i]));
    return p;
}

inline void schedule_to_container(const LatentSchedule& s, Container& c) {
    c.meta.emplace_back("latents.anchors", std::to_string(s.anchors.count()));
    c.meta.emplace_back("latents.frames", std::to_string(s.frames));
    c.meta.emplace_back("latents.lo", std::to_string(s.anchors.lo));
    c.meta.emplace_back("latents.hi", std::to_string(s.anchors.hi));
    c.meta.emplace_back("latents.seed", std::to_string(s.anchors.seed));
    for (int i = 0; i < s.anchors.count(); ++i)
        c.tensors.push_back(tensor_entry("latent.anchor." + std::to_string(i), s.anchors.anchors[i]));
    c.tensors.push_back(real_vector_entry("latent.anchor_times", s.anchor_times));
}

inline LatentSchedule schedule_from_container(const Container& c) {
    LatentSchedule s;
    const int count = std::stoi(c.meta_value("latents.anchors", "0"));
    s.frames = std::stoi(c.meta_value("latents.frames", "0"));
    s.anchors.lo = std::stod(c.meta_value("latents.lo", "0"));
    s.anchors.hi = std::stod(c.meta_value("latents.hi", "0.1"));
    s.anchors.seed = std::stoull(c.meta_value("latents.seed", "0"));
    for (int i = 0; i < count; ++i)
        s.anchors.anchors.push_back(tensor_from_entry(c.get("latent.anchor." + std::to_string(i))));
    s.anchor_times = c.get("latent.anchor_times").f64;
    return s;
}

// ---- ReconResult ----

inline void result_to_container(const ReconResult& r, Container& c) {
    c.meta.emplace_back("method", r.method);
    c.meta.emplace_back("seed", std::to_string(r.seed));
    c.meta.emplace_back("wall_seconds", std::to_string(r.wall_seconds));
    series_to_container(r.series, c);
    c.tensors.push_back(real_vector_entry("frame_times", r.times));
    c.tensors.push_back(real_vector_entry("loss_trace", r.loss_trace.empty()
                                                            ? std::vector<double>{0.0}
                                                            : r.loss_trace));
    c.meta.emplace_back("loss_trace.empty", r.loss_trace.empty() ? "1" : "0");
}

inline ReconResult result_from_container(const Container& c) {
    ReconResult r;
    r.method = c.meta_value("method");
    r.seed = std::stoull(c.meta_value("seed", "0"));
    r.wall_seconds = std::stod(c.meta_value("wall_seconds", "0"));
    r.series = series_from_container(c);
    r.times = c.get("frame_times").f64;
    if (c.meta_value("loss_trace.empty", "0") == "0") r.loss_trace = c.get("loss_trace").f64;
    return r;
}

}  // namespace tddr
