use super::MediaError;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

/// Raw 8-bit pixels, row-major.
#[derive(Debug, Clone, PartialEq)]
pub enum Pixels {
    Gray(Vec<u8>),
    /// Interleaved R, G, B.
    Rgb(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub index: usize,
    pub width: u32,
    pub height: u32,
    pub pixels: Pixels,
}

impl Frame {
    pub fn gray(index: usize, width: u32, height: u32, data: Vec<u8>) -> Self {
        debug_assert_eq!(data.len(), (width * height) as usize);
        Self {
            index,
            width,
            height,
            pixels: Pixels::Gray(data),
        }
    }

    pub fn rgb(index: usize, width: u32, height: u32, data: Vec<u8>) -> Self {
        debug_assert_eq!(data.len(), (width * height * 3) as usize);
        Self {
            index,
            width,
            height,
            pixels: Pixels::Rgb(data),
        }
    }

    /// Iterate pixels as RGB triples; gray pixels are replicated.
    pub fn rgb_pixels(&self) -> Box<dyn Iterator<Item = [u8; 3]> + '_> {
        match &self.pixels {
            Pixels::Gray(g) => Box::new(g.iter().map(|&v| [v, v, v])),
            Pixels::Rgb(c) => Box::new(c.chunks_exact(3).map(|p| [p[0], p[1], p[2]])),
        }
    }

    pub fn to_image(&self) -> image::DynamicImage {
        match &self.pixels {
            Pixels::Gray(g) => image::DynamicImage::ImageLuma8(
                image::GrayImage::from_raw(self.width, self.height, g.clone())
                    .expect("frame buffer matches dimensions"),
            ),
            Pixels::Rgb(c) => image::DynamicImage::ImageRgb8(
                image::RgbImage::from_raw(self.width, self.height, c.clone())
                    .expect("frame buffer matches dimensions"),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub fps: f64,
    pub width: u32,
    pub height: u32,
    pub frames: Vec<Frame>,
}

impl FrameSequence {
    /// Re-indexes frames from zero and checks that all dimensions agree.
    pub fn new(fps: f64, mut frames: Vec<Frame>) -> Result<Self, MediaError> {
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(MediaError::InvalidParameter(format!(
                "fps must be positive, got {fps}"
            )));
        }
        let first = frames
            .first()
            .ok_or_else(|| MediaError::EmptySequence(PathBuf::new()))?;
        let (width, height) = (first.width, first.height);
        for (i, f) in frames.iter_mut().enumerate() {
            if (f.width, f.height) != (width, height) {
                return Err(MediaError::InconsistentDimensions {
                    index: i,
                    want_w: width,
                    want_h: height,
                    got_w: f.width,
                    got_h: f.height,
                });
            }
            f.index = i;
        }
        Ok(Self {
            fps,
            width,
            height,
            frames,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

const IMAGE_EXTENSIONS: [&str; 3] = ["pgm", "ppm", "pnm"];

/// Load a directory of PGM/PPM images (sorted by file name) or a single
/// YUV4MPEG2 stream. `fps` is required for directories and overrides the
/// stream header when given.
pub fn read_frames(path: impl AsRef<Path>, fps: Option<f64>) -> Result<FrameSequence, MediaError> {
    let path = path.as_ref();
    if path.is_dir() {
        read_image_dir(path, fps)
    } else {
        read_y4m(path, fps)
    }
}

fn read_image_dir(dir: &Path, fps: Option<f64>) -> Result<FrameSequence, MediaError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    if files.is_empty() {
        return Err(MediaError::EmptySequence(dir.to_path_buf()));
    }
    let fps = fps.ok_or_else(|| MediaError::MissingFrameRate(dir.to_path_buf()))?;
    files.sort();

    let mut frames = Vec::with_capacity(files.len());
    for (index, file) in files.iter().enumerate() {
        let img = image::open(file)
            .map_err(|e| MediaError::MalformedContainer(format!("{}: {e}", file.display())))?;
        let (w, h) = (img.width(), img.height());
        let frame = match img {
            image::DynamicImage::ImageLuma8(g) => Frame::gray(index, w, h, g.into_raw()),
            other => Frame::rgb(index, w, h, other.to_rgb8().into_raw()),
        };
        frames.push(frame);
    }
    FrameSequence::new(fps, frames).map_err(|e| match e {
        MediaError::EmptySequence(_) => MediaError::EmptySequence(dir.to_path_buf()),
        other => other,
    })
}

fn y4m_err(e: y4m::Error) -> MediaError {
    match e {
        y4m::Error::IoError(io) => MediaError::Io(io),
        y4m::Error::UnknownColorspace => {
            MediaError::UnsupportedEncoding("unknown y4m colorspace".into())
        }
        other => MediaError::MalformedContainer(format!("y4m: {other:?}")),
    }
}

fn read_y4m(path: &Path, fps: Option<f64>) -> Result<FrameSequence, MediaError> {
    let file = fs::File::open(path)?;
    let mut dec = y4m::decode(BufReader::new(file)).map_err(y4m_err)?;
    if dec.get_bit_depth() != 8 {
        return Err(MediaError::UnsupportedEncoding(format!(
            "{}-bit y4m",
            dec.get_bit_depth()
        )));
    }
    let (w, h) = (dec.get_width(), dec.get_height());
    let rate = dec.get_framerate();
    let fps = match fps {
        Some(f) => f,
        None if rate.den > 0 && rate.num > 0 => rate.num as f64 / rate.den as f64,
        None => return Err(MediaError::MissingFrameRate(path.to_path_buf())),
    };
    let mono = matches!(dec.get_colorspace(), y4m::Colorspace::Cmono);

    let mut frames = Vec::new();
    loop {
        let frame = match dec.read_frame() {
            Ok(f) => f,
            Err(y4m::Error::EOF) => break,
            Err(e) => return Err(y4m_err(e)),
        };
        let index = frames.len();
        let y = frame.get_y_plane();
        if mono {
            frames.push(Frame::gray(index, w as u32, h as u32, y.to_vec()));
            continue;
        }
        let (u, v) = (frame.get_u_plane(), frame.get_v_plane());
        // chroma subsampling from plane geometry
        let cw = if u.len() * 2 <= w * h {
            w.div_ceil(2)
        } else {
            w
        };
        let ch = u.len().checked_div(cw).unwrap_or(0);
        let sx = w.div_ceil(cw.max(1));
        let sy = h.div_ceil(ch.max(1));
        let mut rgb = Vec::with_capacity(w * h * 3);
        for row in 0..h {
            for col in 0..w {
                let luma = y[row * w + col] as f64;
                let ci = (row / sy) * cw + col / sx;
                let cb = u[ci] as f64 - 128.0;
                let cr = v[ci] as f64 - 128.0;
                let r = luma + 1.402 * cr;
                let g = luma - 0.344_136 * cb - 0.714_136 * cr;
                let b = luma + 1.772 * cb;
                rgb.extend([r, g, b].map(|c| c.round().clamp(0.0, 255.0) as u8));
            }
        }
        frames.push(Frame::rgb(index, w as u32, h as u32, rgb));
    }
    if frames.is_empty() {
        return Err(MediaError::EmptySequence(path.to_path_buf()));
    }
    FrameSequence::new(fps, frames)
}
