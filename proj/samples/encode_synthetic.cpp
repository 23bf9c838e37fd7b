// Renders a square sweeping across a static background, encodes it into
// snippets and prints how much of each snippet is flagged as motion.

#include <iostream>

#include "dgs/dgs.hpp"

int main() {
  dgs::synth::SceneSpec scene;
  scene.width = 160;
  scene.height = 120;
  scene.n_frames = 120;
  scene.background = {dgs::synth::Background::Kind::noise, {}, 11, 20, 90};
  dgs::synth::SceneObject square;
  square.w = square.h = 16;
  square.x = 4;
  square.y = 52;
  square.vx = {1, 1};
  square.color = {230, 230, 230};
  scene.objects.push_back(square);

  auto video = dgs::synth::render(scene, "square");
  for (const auto& seg : dgs::segment_video(video, {40})) {
    const auto img = dgs::synthesize_dgs(video, seg);
    const auto stats = dgs::motion::image_stats(img, dgs::motion::kDefaultThreshold);
    const auto truth = dgs::synth::ground_truth(scene, seg);
    const auto mask = dgs::motion::motion_mask(img);
    std::cout << dgs::snippet_filename(seg, 40, "png") << ": motion fraction " << stats.motion_fraction
              << ", IoU vs ground truth " << dgs::motion::iou(mask.mask, truth.mask) << '\n';
  }
}
