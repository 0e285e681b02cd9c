use super::{BlobMask, ImageGrid};
use crate::error::{Error, Result};

/// Running-average background with a fixed subtraction threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundModel {
    mean: ImageGrid,
    learning_rate: f64,
    threshold: f64,
}

pub const DEFAULT_LEARNING_RATE: f64 = 0.05;
pub const DEFAULT_THRESHOLD: f64 = 25.0;

impl BackgroundModel {
    pub fn new(mean: ImageGrid, learning_rate: f64, threshold: f64) -> Result<Self> {
        if !(learning_rate > 0.0 && learning_rate <= 1.0) {
            return Err(Error::config(format!(
                "background learning rate must lie in (0, 1], got {learning_rate}"
            )));
        }
        if !(threshold >= 0.0) {
            return Err(Error::config(format!(
                "background threshold must be non-negative, got {threshold}"
            )));
        }
        Ok(Self {
            mean,
            learning_rate,
            threshold,
        })
    }

    /// Initialises from the first plate and folds in the rest with [`Self::updated`].
    pub fn from_plates(plates: &[ImageGrid], learning_rate: f64, threshold: f64) -> Result<Self> {
        let (first, rest) = plates
            .split_first()
            .ok_or_else(|| Error::Data("no background plates".into()))?;
        let mut model = Self::new(first.clone(), learning_rate, threshold)?;
        for plate in rest {
            model = model.updated(plate)?;
        }
        Ok(model)
    }

    pub fn mean(&self) -> &ImageGrid {
        &self.mean
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    fn check_dims(&self, frame: &ImageGrid) -> Result<()> {
        if !self.mean.same_dims(frame) {
            return Err(Error::shape(format!(
                "frame is {}x{} but background is {}x{}",
                frame.width(),
                frame.height(),
                self.mean.width(),
                self.mean.height()
            )));
        }
        Ok(())
    }

    /// `mean' = α·frame + (1 − α)·mean`, per pixel.
    pub fn updated(&self, frame: &ImageGrid) -> Result<Self> {
        self.check_dims(frame)?;
        let a = self.learning_rate;
        let data = self
            .mean
            .data()
            .iter()
            .zip(frame.data())
            .map(|(&m, &f)| a * f + (1.0 - a) * m)
            .collect();
        Ok(Self {
            mean: ImageGrid::new(self.mean.width(), self.mean.height(), data)?,
            learning_rate: self.learning_rate,
            threshold: self.threshold,
        })
    }

    /// Foreground where `|frame − mean| > threshold`; equality is background.
    pub fn subtract(&self, frame: &ImageGrid) -> Result<BlobMask> {
        self.check_dims(frame)?;
        let bits = self
            .mean
            .data()
            .iter()
            .zip(frame.data())
            .map(|(&m, &f)| (f - m).abs() > self.threshold)
            .collect();
        BlobMask::new(frame.width(), frame.height(), bits)
    }
}
