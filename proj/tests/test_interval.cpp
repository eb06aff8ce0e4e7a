#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "vgdial/interval.hpp"
#include "vgdial/scene.hpp"

using namespace vgdial;

namespace {

// one slider over [2, 4] plus an idle anchor; boundary set {0, 2, 4, 10}
SceneGraph slider_scene() {
  ObjectAttrs red{Shape::cube, Size::small, Color::red, Material::rubber};
  ObjectAttrs blue{Shape::sphere, Size::large, Color::blue, Material::metal};
  return oracle::make_scene(
      10.0, {oracle::idle_object(0, red, {0.0, 0.0}, 10.0),
             oracle::moving_object(1, blue, 10.0,
                                   {{ActionKind::sliding, 2.0, 4.0, {1.0, 1.0}, {3.0, 1.0}}})});
}

}  // namespace

TEST_CASE("scene timestamps are the sorted unique motion boundaries") {
  SceneGraph s = slider_scene();
  CHECK(scene_timestamps(s) == std::vector<double>{0.0, 2.0, 4.0, 10.0});
}

TEST_CASE("interval enumeration lists every boundary pair above the floor") {
  SceneGraph s = slider_scene();
  auto ivs = enumerate_intervals(s, 0.5);
  REQUIRE(ivs.size() == 6);
  // sorted by (start, end); adjacent boundary pairs are atomic, the rest
  // span an interior boundary and are compositional
  CHECK(ivs[0] == VideoInterval{0.0, 2.0, IntervalKind::atomic});
  CHECK(ivs[1] == VideoInterval{0.0, 4.0, IntervalKind::compositional});
  CHECK(ivs[2] == VideoInterval{0.0, 10.0, IntervalKind::compositional});
  CHECK(ivs[3] == VideoInterval{2.0, 4.0, IntervalKind::atomic});
  CHECK(ivs[4] == VideoInterval{2.0, 10.0, IntervalKind::compositional});
  CHECK(ivs[5] == VideoInterval{4.0, 10.0, IntervalKind::atomic});

  auto coarse = enumerate_intervals(s, 2.5);
  REQUIRE(coarse.size() == 4);  // the two length-2 atomics drop out
  CHECK(coarse[0].end == 4.0);
  CHECK(coarse[3] == VideoInterval{4.0, 10.0, IntervalKind::atomic});
}

TEST_CASE("classification looks only at strictly interior boundaries") {
  SceneGraph s = slider_scene();
  CHECK(classify_interval(s, 0.0, 2.0) == IntervalKind::atomic);
  CHECK(classify_interval(s, 2.0, 4.0) == IntervalKind::atomic);
  CHECK(classify_interval(s, 2.5, 3.5) == IntervalKind::atomic);
  CHECK(classify_interval(s, 1.0, 3.0) == IntervalKind::compositional);
  CHECK(classify_interval(s, 0.0, 10.0) == IntervalKind::compositional);
  CHECK(classify_interval(s, 3.0, 4.5) == IntervalKind::compositional);
}

TEST_CASE("action summaries clip events to the interval") {
  SceneGraph s = slider_scene();
  VideoInterval covering{0.0, 10.0, IntervalKind::compositional};
  ActionSummary sum = summarize_actions(s, covering, 1);
  CHECK(sum.action_set == std::vector<ActionKind>{ActionKind::sliding});
  CHECK(sum.action_sequence == std::vector<ActionKind>{ActionKind::sliding});
  CHECK(sum.frequency.at(ActionKind::sliding) == 1);

  // zero-measure touch at t = 4 does not count
  ActionSummary after{summarize_actions(s, {4.0, 6.0, IntervalKind::atomic}, 1)};
  CHECK(after.action_set == std::vector<ActionKind>{ActionKind::no_action});
  CHECK(after.action_sequence == std::vector<ActionKind>{ActionKind::no_action});
  CHECK(after.frequency.empty());

  // any positive overlap does
  ActionSummary graze{summarize_actions(s, {3.9, 6.0, IntervalKind::compositional}, 1)};
  CHECK(graze.frequency.at(ActionKind::sliding) == 1);

  // the idle object summarizes to the placeholder everywhere
  ActionSummary idle{summarize_actions(s, covering, 0)};
  CHECK(idle.action_sequence == std::vector<ActionKind>{ActionKind::no_action});
}

TEST_CASE("multi-event sequences come out in chronological order") {
  ObjectAttrs a{Shape::cube, Size::small, Color::green, Material::rubber};
  SceneGraph s = oracle::make_scene(
      10.0,
      {oracle::moving_object(0, a, 10.0,
                             {{ActionKind::flying, 1.0, 2.0, {0.0, 0.0}, {2.0, 0.0}},
                              {ActionKind::rotating, 3.0, 4.0, {2.0, 0.0}, {2.0, 0.0}},
                              {ActionKind::flying, 5.0, 6.0, {2.0, 0.0}, {0.0, 2.0}}})});
  ActionSummary sum = summarize_actions(s, {0.0, 10.0, IntervalKind::compositional}, 0);
  CHECK(sum.action_sequence ==
        std::vector<ActionKind>{ActionKind::flying, ActionKind::rotating, ActionKind::flying});
  CHECK(sum.action_set == std::vector<ActionKind>{ActionKind::flying, ActionKind::rotating});
  CHECK(sum.frequency.at(ActionKind::flying) == 2);

  // clipping to the tail keeps only the last flight
  ActionSummary tail = summarize_actions(s, {4.5, 10.0, IntervalKind::compositional}, 0);
  CHECK(tail.action_sequence == std::vector<ActionKind>{ActionKind::flying});
  CHECK(tail.frequency.at(ActionKind::flying) == 1);
}

TEST_CASE("position movement is about displacement, not action") {
  ObjectAttrs a{Shape::cylinder, Size::medium, Color::gold, Material::metal};
  SceneGraph s = oracle::make_scene(
      10.0, {oracle::moving_object(
                0, a, 10.0, {{ActionKind::rotating, 2.0, 4.0, {1.0, 1.0}, {1.0, 1.0}}}),
             oracle::moving_object(
                 1, a, 10.0, {{ActionKind::sliding, 2.0, 4.0, {0.0, 0.0}, {2.0, 2.0}}})});
  CHECK_FALSE(object_moves_in(s, 0, 2.0, 4.0));  // rotation stays in place
  CHECK(object_moves_in(s, 1, 2.0, 4.0));
  CHECK_FALSE(object_moves_in(s, 1, 4.0, 6.0));
  CHECK_FALSE(object_moves_in(s, 1, 0.0, 2.0));
}

TEST_CASE("spatial relations hold at both endpoints or not at all") {
  SceneGraph s = slider_scene();
  VideoInterval pre{0.0, 2.0, IntervalKind::atomic};
  VideoInterval mid{2.0, 4.0, IntervalKind::atomic};
  VideoInterval post{4.0, 10.0, IntervalKind::atomic};

  // object 1 sits at (1,1) then slides to (3,1); object 0 is pinned at (0,0)
  CHECK(holds_spatial(s, pre, 1, 0, SpatialRel::right) == Tri::yes);
  CHECK(holds_spatial(s, pre, 1, 0, SpatialRel::left) == Tri::no);
  CHECK(holds_spatial(s, pre, 1, 0, SpatialRel::behind) == Tri::yes);
  CHECK(holds_spatial(s, pre, 1, 0, SpatialRel::front) == Tri::no);
  CHECK(holds_spatial(s, pre, 0, 1, SpatialRel::left) == Tri::yes);

  // one mover against a static anchor stays defined
  CHECK(holds_spatial(s, mid, 1, 0, SpatialRel::right) == Tri::yes);
  CHECK(holds_spatial(s, post, 1, 0, SpatialRel::right) == Tri::yes);

  CHECK_THROWS_AS(
      holds_spatial(s, {0.0, 10.0, IntervalKind::compositional}, 1, 0, SpatialRel::left),
      IntervalKindError);
}

TEST_CASE("relations crossing zero displacement flip to no") {
  // mover crosses the anchor's x during the span: right at start, not at end
  ObjectAttrs a{Shape::cube, Size::small, Color::red, Material::rubber};
  SceneGraph s = oracle::make_scene(
      10.0, {oracle::idle_object(0, a, {0.0, 0.0}, 10.0),
             oracle::moving_object(
                 1, a, 10.0, {{ActionKind::sliding, 2.0, 4.0, {2.0, 1.0}, {-2.0, 1.0}}})});
  VideoInterval mid{2.0, 4.0, IntervalKind::atomic};
  CHECK(holds_spatial(s, mid, 1, 0, SpatialRel::right) == Tri::no);
  CHECK(holds_spatial(s, mid, 1, 0, SpatialRel::left) == Tri::no);
  CHECK(holds_spatial(s, mid, 1, 0, SpatialRel::behind) == Tri::yes);
}

TEST_CASE("both objects moving makes the relation undefined") {
  ObjectAttrs a{Shape::cube, Size::small, Color::red, Material::rubber};
  SceneGraph s = oracle::make_scene(
      10.0, {oracle::moving_object(
                0, a, 10.0, {{ActionKind::sliding, 2.0, 4.0, {0.0, 0.0}, {1.0, 0.0}}}),
             oracle::moving_object(
                 1, a, 10.0, {{ActionKind::flying, 2.0, 4.0, {3.0, 3.0}, {4.0, 4.0}}})});
  VideoInterval mid{2.0, 4.0, IntervalKind::atomic};
  CHECK(holds_spatial(s, mid, 1, 0, SpatialRel::right) == Tri::undefined);
  // rotation does not move, so swapping one slide for a spin re-defines it
  s.objects[0].timeline = oracle::moving_object(
      0, a, 10.0, {{ActionKind::rotating, 2.0, 4.0, {0.0, 0.0}, {0.0, 0.0}}}).timeline;
  CHECK(holds_spatial(s, mid, 1, 0, SpatialRel::right) == Tri::yes);
}

TEST_CASE("containment during the span hides the relation") {
  ObjectAttrs cone{Shape::cone, Size::large, Color::yellow, Material::rubber};
  ObjectAttrs cube{Shape::cube, Size::small, Color::red, Material::rubber};
  SceneGraph s = oracle::make_scene(10.0, {oracle::idle_object(0, cone, {2.0, 2.0}, 10.0),
                                           oracle::idle_object(1, cube, {0.0, 0.0}, 10.0),
                                           oracle::idle_object(2, cube, {5.0, 5.0}, 10.0)});
  s.objects[1].containment.push_back({0, 3.0, 6.0});
  CHECK(holds_spatial(s, {0.0, 2.0, IntervalKind::atomic}, 1, 2, SpatialRel::left) == Tri::yes);
  CHECK(holds_spatial(s, {2.0, 7.0, IntervalKind::atomic}, 1, 2, SpatialRel::left) ==
        Tri::undefined);
  CHECK(holds_spatial(s, {2.0, 7.0, IntervalKind::atomic}, 2, 1, SpatialRel::right) ==
        Tri::undefined);
  CHECK(holds_spatial(s, {6.0, 10.0, IntervalKind::atomic}, 1, 2, SpatialRel::left) == Tri::yes);

  // while hidden, the object reports its container's position
  CHECK(position_at(s, 1, 4.5).x == doctest::Approx(2.0));
  CHECK(position_at(s, 1, 8.0).x == doctest::Approx(0.0));
}

TEST_CASE("interval engine agrees with dense-grid recomputation") {
  SceneConfig cfg;
  int checked = 0;
  for (std::uint64_t seed = 500; seed < 540; ++seed) {
    SceneGraph s = simulate_scene(cfg, seed);
    oracle::Grid g = oracle::build_grid(s);
    for (const auto& iv : enumerate_intervals(s, 0.5)) {
      CHECK(iv.kind == oracle::classify(g, iv.start, iv.end));
      for (const auto& o : s.objects) {
        oracle::Summary want = oracle::summarize(g, o.id, iv.start, iv.end);
        ActionSummary got = summarize_actions(s, iv, o.id);
        CHECK(got.action_sequence == want.seq);
        CHECK(got.action_set == want.set);
        CHECK(object_moves_in(s, o.id, iv.start, iv.end) ==
              oracle::moves_in(g, o.id, iv.start, iv.end));
        ++checked;
      }
    }
  }
  CHECK(checked > 5000);  // the sweep actually covered a broad sample
}

TEST_CASE("string conversions roundtrip") {
  for (const char* k : {"atomic", "compositional", "none"})
    CHECK(to_string(interval_kind_from_string(k)) == k);
  for (const char* r : {"left", "right", "front", "behind"})
    CHECK(to_string(spatial_from_string(r)) == r);
  for (const char* r : {"before", "after", "during"})
    CHECK(to_string(temporal_from_string(r)) == r);
  CHECK_THROWS_AS(interval_kind_from_string("diagonal"), DataError);
  CHECK_THROWS_AS(spatial_from_string("above"), DataError);
}
