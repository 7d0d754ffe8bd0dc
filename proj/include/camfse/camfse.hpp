#pragma once

#include "camfse/error.hpp"
#include "camfse/evaluation.hpp"
#include "camfse/fse_engine.hpp"
#include "camfse/loss_model.hpp"
#include "camfse/motion_estimation.hpp"
#include "camfse/pipeline.hpp"
#include "camfse/video_io.hpp"
#include "camfse/volume_builder.hpp"
